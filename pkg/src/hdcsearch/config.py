"""Architecture genome and search space.

An ``ArchConfig`` holds the 8 searchable decisions of one hypervector
architecture; ``SearchSpace`` enumerates the menus each decision is drawn
from and supports restricting every menu to a subset (for small studies),
never extending it.
"""
from __future__ import annotations

from dataclasses import dataclass, fields

from .hv import ElementType, EwiseOp

DIM_MENU: tuple[int, ...] = tuple(range(1000, 20001, 1000))
SPARSITY_MENU: tuple[float, ...] = tuple(i / 10 for i in range(1, 10))
GRAM_SIZE_MENU: tuple[int, ...] = (1, 2, 3, 4, 5, 6)
BASE_DTYPE_MENU: tuple[ElementType, ...] = (ElementType.BINARY, ElementType.BIPOLAR)
WIDE_DTYPE_MENU: tuple[ElementType, ...] = (
    ElementType.BINARY,
    ElementType.BIPOLAR,
    ElementType.INT8,
    ElementType.INT16,
    ElementType.INT32,
    ElementType.INT64,
)
SHIFT_MENU: tuple[int, ...] = (0, 1, 2, 3, 4, 5, 6, 7)
EWISE_OP_MENU: tuple[EwiseOp, ...] = (EwiseOp.MULT, EwiseOp.XOR, EwiseOp.AND, EwiseOp.OR)


@dataclass(frozen=True)
class ArchConfig:
    """One architecture: the 8 decisions that fully determine the pipeline."""

    dim: int = 10000
    sparsity: float = 0.5
    gram_size: int = 3
    base_dtype: ElementType = ElementType.BIPOLAR
    encoded_dtype: ElementType = ElementType.INT64
    resultant_dtype: ElementType = ElementType.INT64
    shift: int = 1
    ewise_op: EwiseOp = EwiseOp.MULT

    def validate(self, strict: bool = False) -> "ArchConfig":
        """Check field values; ``strict`` additionally requires dim and sparsity
        to sit on their menu grid (relaxed mode allows arbitrary values for
        desk-scale work)."""
        if self.dim < 1:
            raise ValueError(f"dim: must be >= 1, got {self.dim}")
        if not 0.0 < self.sparsity < 1.0:
            raise ValueError(f"sparsity: must lie strictly between 0 and 1, got {self.sparsity}")
        if self.gram_size not in GRAM_SIZE_MENU:
            raise ValueError(f"gram_size: {self.gram_size} not in {GRAM_SIZE_MENU}")
        if self.base_dtype not in BASE_DTYPE_MENU:
            raise ValueError(f"base_dtype: must be binary or bipolar, got {self.base_dtype.value}")
        if self.encoded_dtype not in WIDE_DTYPE_MENU:
            raise ValueError(f"encoded_dtype: {self.encoded_dtype} not allowed")
        if self.resultant_dtype not in WIDE_DTYPE_MENU:
            raise ValueError(f"resultant_dtype: {self.resultant_dtype} not allowed")
        if self.shift not in SHIFT_MENU:
            raise ValueError(f"shift: {self.shift} not in {SHIFT_MENU}")
        if not isinstance(self.ewise_op, EwiseOp):
            raise ValueError(f"ewise_op: {self.ewise_op!r} is not a valid operator")
        if strict:
            if self.dim not in DIM_MENU:
                raise ValueError(f"dim: {self.dim} not in the 1000..20000 step-1000 menu")
            if self.sparsity not in SPARSITY_MENU:
                raise ValueError(f"sparsity: {self.sparsity} not in the 0.1..0.9 step-0.1 menu")
        return self

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "sparsity": self.sparsity,
            "gram_size": self.gram_size,
            "base_dtype": self.base_dtype.value,
            "encoded_dtype": self.encoded_dtype.value,
            "resultant_dtype": self.resultant_dtype.value,
            "shift": self.shift,
            "ewise_op": self.ewise_op.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ArchConfig":
        known = {f.name for f in fields(cls)}
        extra = set(data) - known
        if extra:
            raise ValueError(f"unknown architecture fields: {sorted(extra)}")
        kwargs = dict(data)
        for key in ("base_dtype", "encoded_dtype", "resultant_dtype"):
            if key in kwargs:
                kwargs[key] = ElementType.parse(kwargs[key])
        if "ewise_op" in kwargs:
            kwargs["ewise_op"] = EwiseOp.parse(kwargs["ewise_op"])
        if "dim" in kwargs:
            kwargs["dim"] = int(kwargs["dim"])
        if "sparsity" in kwargs:
            kwargs["sparsity"] = float(kwargs["sparsity"])
        if "gram_size" in kwargs:
            kwargs["gram_size"] = int(kwargs["gram_size"])
        if "shift" in kwargs:
            kwargs["shift"] = int(kwargs["shift"])
        return cls(**kwargs)

    def describe(self) -> str:
        return (
            f"dim={self.dim} sparsity={self.sparsity} gram={self.gram_size} "
            f"base={self.base_dtype.value} encoded={self.encoded_dtype.value} "
            f"resultant={self.resultant_dtype.value} shift={self.shift} op={self.ewise_op.value}"
        )


DECISION_NAMES = (
    "dim",
    "sparsity",
    "gram_size",
    "base_dtype",
    "encoded_dtype",
    "resultant_dtype",
    "shift",
    "ewise_op",
)

_FULL_MENUS: dict[str, tuple] = {
    "dim": DIM_MENU,
    "sparsity": SPARSITY_MENU,
    "gram_size": GRAM_SIZE_MENU,
    "base_dtype": BASE_DTYPE_MENU,
    "encoded_dtype": WIDE_DTYPE_MENU,
    "resultant_dtype": WIDE_DTYPE_MENU,
    "shift": SHIFT_MENU,
    "ewise_op": EWISE_OP_MENU,
}


class SearchSpace:
    """Ordered decision menus the controller samples from."""

    def __init__(self, menus: dict[str, tuple] | None = None):
        self.menus: dict[str, tuple] = {}
        menus = menus or {}
        for name in DECISION_NAMES:
            chosen = tuple(menus.get(name, _FULL_MENUS[name]))
            if not chosen:
                raise ValueError(f"{name}: menu must be nonempty")
            for value in chosen:
                if value not in _FULL_MENUS[name]:
                    raise ValueError(f"{name}: {value!r} is not in the allowed menu {_FULL_MENUS[name]}")
            if len(set(chosen)) != len(chosen):
                raise ValueError(f"{name}: menu contains duplicates")
            self.menus[name] = chosen

    @classmethod
    def full(cls) -> "SearchSpace":
        return cls()

    @property
    def arities(self) -> list[int]:
        return [len(self.menus[name]) for name in DECISION_NAMES]

    @property
    def cardinality(self) -> int:
        total = 1
        for arity in self.arities:
            total *= arity
        return total

    def config_at(self, indices: list[int] | tuple[int, ...]) -> ArchConfig:
        """Build the architecture selected by one index per decision."""
        if len(indices) != len(DECISION_NAMES):
            raise ValueError(f"expected {len(DECISION_NAMES)} indices, got {len(indices)}")
        values = {}
        for name, idx in zip(DECISION_NAMES, indices):
            menu = self.menus[name]
            if not 0 <= idx < len(menu):
                raise ValueError(f"{name}: index {idx} out of range for menu of size {len(menu)}")
            values[name] = menu[idx]
        return ArchConfig(**values)

    def indices_of(self, config: ArchConfig) -> list[int]:
        indices = []
        for name in DECISION_NAMES:
            value = getattr(config, name)
            menu = self.menus[name]
            if value not in menu:
                raise ValueError(f"{name}: {value!r} is outside this search space")
            indices.append(menu.index(value))
        return indices

    def sample_uniform(self, rng) -> ArchConfig:
        return self.config_at([int(rng.integers(len(self.menus[name]))) for name in DECISION_NAMES])
