# backend/app/core/families.py
"""
Coefficient families {C_n(α)}: the built-in ones and custom families loaded
from JSON/YAML files (schema in docs/family_schema.md).
"""
import json
import logging
from bisect import bisect_right
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np
import yaml
from pydantic import BaseModel, Field, ValidationError, field_validator

from app.errors import InvalidParameter
from app.models import CoefficientFamily

logger = logging.getLogger(__name__)

BUILTIN_NAMES = ("exp", "exp0", "poly", "single", "two")

# grid used to verify the declared symmetric / real flags of custom families
_CHECK_ALPHAS = (0.25, 0.5, 1.0, 2.0, 4.0)


def _abs_n(n: np.ndarray) -> np.ndarray:
    return np.abs(np.asarray(n, dtype=np.int64)).astype(np.float64)


def exponential_family() -> CoefficientFamily:
    def rule(n: np.ndarray, alpha: float) -> np.ndarray:
        return np.exp(-alpha * _abs_n(n))

    return CoefficientFamily(
        name="exp",
        rule=rule,
        description="C_n = exp(-alpha |n|)",
    )


def exponential_family_no_mean() -> CoefficientFamily:
    def rule(n: np.ndarray, alpha: float) -> np.ndarray:
        values = np.exp(-alpha * _abs_n(n))
        return np.where(np.asarray(n) == 0, 0.0, values)

    return CoefficientFamily(
        name="exp0",
        rule=rule,
        description="C_n = exp(-alpha |n|) for n != 0, C_0 = 0",
    )


def polynomial_family() -> CoefficientFamily:
    def rule(n: np.ndarray, alpha: float) -> np.ndarray:
        m = _abs_n(n)
        out = np.zeros_like(m)
        nz = m > 0
        out[nz] = m[nz] ** (-alpha)
        return out

    return CoefficientFamily(
        name="poly",
        rule=rule,
        description="C_n = |n|^(-alpha) for n != 0, C_0 = 0",
    )


def single_mode_family(m: int = 0) -> CoefficientFamily:
    def rule(n: np.ndarray, alpha: float) -> np.ndarray:
        return (np.asarray(n) == m).astype(np.float64)

    return CoefficientFamily(
        name="single" if m == 0 else f"single[{m}]",
        rule=rule,
        is_symmetric=(m == 0),
        support=abs(m),
        description=f"C_{m} = 1, all others 0 (L_z eigenstate)",
    )


def two_mode_family() -> CoefficientFamily:
    def rule(n: np.ndarray, alpha: float) -> np.ndarray:
        return np.where(np.abs(np.asarray(n)) == 1, 0.5, 0.0)

    return CoefficientFamily(
        name="two",
        rule=rule,
        support=1,
        description="C_{+1} = C_{-1} = 1/2",
    )


def scaled_family(family: CoefficientFamily, factor: float) -> CoefficientFamily:
    """Same state, every coefficient multiplied by a positive constant."""
    if not factor > 0:
        raise InvalidParameter(f"scale factor must be positive, got {factor}")
    base = family.rule

    def rule(n: np.ndarray, alpha: float) -> np.ndarray:
        return factor * np.asarray(base(n, alpha))

    return family.model_copy(update={"name": f"{family.name}*{factor:g}", "rule": rule})


def builtin_family(name: str, mode: int = 0) -> CoefficientFamily:
    if name == "exp":
        return exponential_family()
    if name == "exp0":
        return exponential_family_no_mean()
    if name == "poly":
        return polynomial_family()
    if name == "single":
        return single_mode_family(mode)
    if name == "two":
        return two_mode_family()
    raise InvalidParameter(f"Unknown family '{name}'. Built-ins: {', '.join(BUILTIN_NAMES)}")


# ============================
# Custom family files
# ============================

class FamilyEntry(BaseModel):
    n: int
    expr: str = Field(..., pattern="^(exp|poly|table)$")
    weight: Optional[complex] = None

    @field_validator("weight", mode="before")
    @classmethod
    def _pair_to_complex(cls, v):
        if isinstance(v, (list, tuple)):
            if len(v) != 2:
                raise ValueError("weight must be a number or [re, im]")
            return complex(float(v[0]), float(v[1]))
        if isinstance(v, (int, float)) and not isinstance(v, bool):
            return complex(v)
        return v


class FamilySpec(BaseModel):
    name: str
    symmetric: bool
    real: bool
    entries: List[FamilyEntry] = Field(..., min_length=1)
    # alpha (as a string key) -> rows of [n, re, im]
    table: Optional[Dict[str, List[Tuple[int, float, float]]]] = None

    @field_validator("table", mode="before")
    @classmethod
    def _keys_to_str(cls, v):
        # YAML reads unquoted α keys as numbers
        if isinstance(v, dict):
            return {str(k): rows for k, rows in v.items()}
        return v


class _Table:
    """Piecewise-linear interpolation in α of tabulated coefficients."""

    def __init__(self, raw: Dict[str, List[Tuple[int, float, float]]]):
        try:
            items = sorted((float(a), rows) for a, rows in raw.items())
        except ValueError as e:
            raise InvalidParameter(f"table keys must be numbers: {e}") from e
        if not items:
            raise InvalidParameter("table is empty")
        self.alphas = [a for a, _ in items]
        self.values = [{int(n): complex(re, im) for n, re, im in rows} for _, rows in items]

    def value(self, n: int, alpha: float) -> complex:
        lo, hi = self.alphas[0], self.alphas[-1]
        if not lo <= alpha <= hi:
            raise InvalidParameter(f"alpha={alpha} outside tabulated range [{lo}, {hi}]")
        j = bisect_right(self.alphas, alpha)
        if j >= len(self.alphas) or self.alphas[j - 1] == alpha:
            return self.values[j - 1].get(n, 0j)
        a0, a1 = self.alphas[j - 1], self.alphas[j]
        t = (alpha - a0) / (a1 - a0)
        return (1 - t) * self.values[j - 1].get(n, 0j) + t * self.values[j].get(n, 0j)


def family_from_spec(spec: FamilySpec) -> CoefficientFamily:
    table = _Table(spec.table) if spec.table is not None else None
    entries = {}
    for e in spec.entries:
        if e.n in entries:
            raise InvalidParameter(f"duplicate entry for n={e.n}")
        if e.expr == "poly" and e.n == 0:
            raise InvalidParameter("expr 'poly' is undefined at n = 0")
        if e.expr == "table" and table is None:
            raise InvalidParameter(f"entry n={e.n} uses 'table' but no table was given")
        entries[e.n] = e

    def rule(n: np.ndarray, alpha: float) -> np.ndarray:
        n = np.asarray(n, dtype=np.int64)
        out = np.zeros(n.shape, dtype=np.complex128)
        for idx, k in np.ndenumerate(n):
            entry = entries.get(int(k))
            if entry is None:
                continue
            if entry.expr == "exp":
                value = complex(np.exp(-alpha * abs(entry.n)))
            elif entry.expr == "poly":
                value = complex(abs(entry.n) ** (-alpha))
            else:
                value = table.value(entry.n, alpha)
            out[idx] = value * (entry.weight if entry.weight is not None else 1.0)
        return out

    family = CoefficientFamily(
        name=spec.name,
        rule=rule,
        is_real=spec.real,
        is_symmetric=spec.symmetric,
        support=max(abs(n) for n in entries),
        description=f"custom family with {len(entries)} entries",
    )
    _verify_flags(family, table)
    return family


def _verify_flags(family: CoefficientFamily, table: Optional[_Table]) -> None:
    alphas = list(_CHECK_ALPHAS) if table is None else list(table.alphas)
    n = np.arange(-family.support, family.support + 1)
    for alpha in alphas:
        c = family.coefficients(n, alpha)
        if family.is_real and np.any(c.imag != 0.0):
            raise InvalidParameter(f"family '{family.name}' declared real but has complex coefficients")
        if family.is_symmetric and not np.allclose(np.abs(c), np.abs(c[::-1]), rtol=1e-12, atol=0.0):
            raise InvalidParameter(f"family '{family.name}' declared symmetric but |C_n| != |C_-n|")


def load_family(path: Path) -> CoefficientFamily:
    """Load a custom family from a .json, .yaml or .yml file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise InvalidParameter(f"cannot read family file {path}: {e}") from e

    try:
        if path.suffix.lower() in (".yaml", ".yml"):
            raw = yaml.safe_load(text)
        else:
            raw = json.loads(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise InvalidParameter(f"cannot parse family file {path}: {e}") from e

    try:
        spec = FamilySpec.model_validate(raw)
    except ValidationError as e:
        raise InvalidParameter(f"invalid family file {path}: {e}") from e

    logger.debug("loaded custom family %s from %s", spec.name, path)
    return family_from_spec(spec)


def resolve_family(name: str, spec_path: Optional[Path] = None, mode: int = 0) -> CoefficientFamily:
    """Pick a built-in family by name, or load `custom` from spec_path."""
    if name == "custom":
        if spec_path is None:
            raise InvalidParameter("family 'custom' needs a spec file")
        return load_family(spec_path)
    return builtin_family(name, mode=mode)
