"""
Exception hierarchy shared by every layer.

Each error carries a stable machine code (its class name) and the process
exit status the CLI reports for it.
"""
from pathlib import Path
from typing import Optional, Union


class MsanError(Exception):
    """Base class for all expected, user-facing failures."""

    exit_code = 1

    @property
    def code(self) -> str:
        return type(self).__name__


# --- configuration -------------------------------------------------------

class ConfigError(MsanError):
    """Invalid configuration value or unreadable config file."""

    exit_code = 2

    def __init__(self, message: str, path: Optional[Union[str, Path]] = None, line: Optional[int] = None):
        self.path = str(path) if path is not None else None
        self.line = line
        location = ""
        if self.path is not None:
            location = f"{self.path}:{line}: " if line is not None else f"{self.path}: "
        super().__init__(f"{location}{message}")


# --- SMILES parsing ------------------------------------------------------

class SmilesError(MsanError):
    """Base for SMILES parse failures; records the input and character position."""

    exit_code = 3

    def __init__(self, message: str, smiles: str = "", position: Optional[int] = None):
        self.reason = message
        self.smiles = smiles
        self.position = position
        where = f" at position {position}" if position is not None else ""
        super().__init__(f"{message}{where} in {smiles!r}")


class EmptyInput(SmilesError):
    pass


class UnmatchedRingBond(SmilesError):
    pass


class UnbalancedParen(SmilesError):
    pass


class UnknownAtomSymbol(SmilesError):
    pass


# --- numeric engine ------------------------------------------------------

class ShapeMismatch(MsanError):
    pass


class EmptyBatch(MsanError):
    pass


class WidthMismatch(MsanError):
    pass


class EmptyPool(MsanError):
    pass


# --- datasets ------------------------------------------------------------

class DataError(MsanError):
    exit_code = 3


class UnknownDrugId(DataError):
    def __init__(self, drug_id: str, path: Optional[Union[str, Path]] = None, line: Optional[int] = None):
        self.drug_id = drug_id
        self.path = str(path) if path is not None else None
        self.line = line
        location = f" ({self.path}:{line})" if self.path is not None and line is not None else ""
        super().__init__(f"unknown drug id {drug_id!r}{location}")


class MalformedRow(DataError):
    def __init__(self, message: str, path: Union[str, Path], line: int):
        self.path = str(path)
        self.line = line
        super().__init__(f"{self.path}:{line}: {message}")


class SamplingExhausted(DataError):
    pass


# --- evaluation / checkpoints --------------------------------------------

class SingleClassAUC(MsanError):
    """AUC is undefined when only one class is present."""


class IncompatibleCheckpoint(MsanError):
    exit_code = 4
