import numpy as np
import pytest

from strongbell import OutcomePdf, QuantumModel, QuantumSource, TableSource


@pytest.fixture
def quantum_source() -> QuantumSource:
    return QuantumSource(QuantumModel.from_omega())


def scaled_table(scale: float) -> TableSource:
    """Literal table mimicking an ideal concordant source at a tiny rate.

    Entries stay inside [0, 1] for every scale used in the tests, so the same
    table exercises the positive-constant invariance of the ratio evaluators.
    """
    base = 1e-4 * scale
    entries = {}
    for d in (0.0, 22.5, 45.0, 60.0, 67.5, 112.5, 120.0, 157.5):
        c2 = np.cos(2 * np.radians(d))
        entries[d] = OutcomePdf(
            pp=base * (1 + c2), pm=base * (1 - c2),
            mp=base * (1 - c2), mm=base * (1 + c2),
            s1_plus=2 * base, s1_minus=2 * base,
            s2_plus=2 * base, s2_minus=2 * base,
        )
    return TableSource(entries)
