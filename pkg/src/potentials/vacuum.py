from dataclasses import dataclass, field
from enum import Enum
from typing import Mapping, Optional

import math

from utils.errors import InconsistentRecordError, NonFiniteValuesError


class VacuumKind(str, Enum):
    BS_QUADRATIC = "BsQuadratic"
    MG_STATIONARY = "MgStationary"
    QUARTIC_FIXED_NORM = "QuarticFixedNorm"


class Classification(str, Enum):
    TRIVIAL = "Trivial"
    NON_TRIVIAL = "NonTrivial"
    PRICE_TRIVIAL = "PriceTrivial"
    VOL_TRIVIAL = "VolTrivial"


@dataclass(frozen=True)
class VacuumSolution:
    """
    Vacuum of a field-space potential.

    Attributes:
        kind: Which potential was minimized.
        values: Field values at the vacuum (phi, phi_x, phi_y, S, ...).
        classification: Trivial iff every value is zero.
        ratio: phi_y / phi_x equilibrium ratio, MG only.
    """

    kind: VacuumKind
    values: Mapping[str, float]
    classification: Classification
    ratio: Optional[float] = field(default=None)

    def __post_init__(self):
        if not all(math.isfinite(v) for v in self.values.values()):
            raise NonFiniteValuesError(f"Vacuum values must be finite: {dict(self.values)}")
        all_zero = all(v == 0.0 for v in self.values.values())
        if all_zero != (self.classification is Classification.TRIVIAL):
            raise InconsistentRecordError(
                f"Classification {self.classification.value} is inconsistent "
                f"with values {dict(self.values)}."
            )

    def to_dict(self) -> dict:
        data = {
            "kind": self.kind.value,
            "classification": self.classification.value,
            "values": dict(self.values),
        }
        if self.ratio is not None:
            data["ratio"] = self.ratio
        return data
