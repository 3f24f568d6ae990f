"""Fast phase retrieval for Schwarz objects."""

from ._core import (
    DimensionError,
    DomainError,
    FastPhaseError,
    FormatError,
    InfeasibleError,
    IoError,
    NumericError,
    ParameterError,
    aligned_relative_error,
    dft_oversampled,
    generate_schwarz_object,
    masked_measurements,
    masked_retrieve,
    measure,
    read_tensor,
    retrieve,
    rmse_db,
    schwarz_init,
    winding,
    write_tensor,
)

__all__ = [name for name in dir() if not name.startswith("_")]
