"""Small input-validation helpers shared across the package."""

from __future__ import annotations

import math

import numpy as np


class ValidationError(ValueError):
    """Invalid user input; carries the offending field name when known."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


def require(condition, message, field=None):
    if not condition:
        raise ValidationError(message, field=field)


def check_scalar(value, name, *, minimum=None, maximum=None, finite=True):
    """Coerce to float and enforce simple bounds."""
    try:
        out = float(value)
    except (TypeError, ValueError):
        raise ValidationError("expected a real number", field=name) from None
    if finite and not math.isfinite(out):
        raise ValidationError("must be finite", field=name)
    if minimum is not None and out < minimum:
        raise ValidationError(f"must be >= {minimum}, got {out}", field=name)
    if maximum is not None and out > maximum:
        raise ValidationError(f"must be <= {maximum}, got {out}", field=name)
    return out


def check_int(value, name, *, minimum=None, maximum=None):
    if isinstance(value, bool) or (
        not isinstance(value, (int, np.integer))
        and not (isinstance(value, float) and value.is_integer())
    ):
        raise ValidationError(f"expected an integer, got {value!r}", field=name)
    out = int(value)
    if minimum is not None and out < minimum:
        raise ValidationError(f"must be >= {minimum}, got {out}", field=name)
    if maximum is not None and out > maximum:
        raise ValidationError(f"must be <= {maximum}, got {out}", field=name)
    return out


def check_array(value, name, *, shape=None, ndim=None, dtype=float, finite=True):
    """Return ``value`` as an ndarray after shape/finiteness checks.

    ``shape`` entries of ``None`` match any length along that axis.
    """
    arr = np.asarray(value, dtype=dtype)
    if ndim is not None and arr.ndim != ndim:
        raise ValidationError(f"expected {ndim} dimensions, got {arr.ndim}", field=name)
    if shape is not None:
        if arr.ndim != len(shape):
            raise ValidationError(
                f"expected {len(shape)} dimensions, got {arr.ndim}", field=name
            )
        for axis, want in enumerate(shape):
            if want is not None and arr.shape[axis] != want:
                raise ValidationError(
                    f"axis {axis} must have length {want}, got {arr.shape[axis]}",
                    field=name,
                )
    if finite and arr.size and not np.isfinite(arr).all():
        raise ValidationError("contains non-finite entries", field=name)
    return arr
