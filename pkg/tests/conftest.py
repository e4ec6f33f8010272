import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from proxsim import kernels
from proxsim.domain import DomainOfApplicability, VariableSpec


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # keep JIT compilation out of timed assertions
    kernels.warmup()


@pytest.fixture
def unit_domain_1d():
    return DomainOfApplicability(
        inputs=(VariableSpec("x", "continuous", 0.0, 1.0),),
        outputs=(VariableSpec("y", "continuous", -1e6, 1e6),),
    )


@pytest.fixture
def unit_domain_2d():
    return DomainOfApplicability(
        inputs=(
            VariableSpec("x1", "continuous", 0.0, 1.0),
            VariableSpec("x2", "continuous", 0.0, 1.0),
        ),
        outputs=(VariableSpec("y", "continuous", -1e6, 1e6),),
    )


@pytest.fixture
def mixed_domain():
    return DomainOfApplicability(
        inputs=(
            VariableSpec("d", "continuous", 10.0, 100.0, unit="flights/h"),
            VariableSpec("mode", "categorical", levels=("low", "med", "high")),
        ),
        outputs=(VariableSpec("y", "continuous", -1e6, 1e6),),
    )


def rand_unit_domain(dim):
    return DomainOfApplicability(
        inputs=tuple(VariableSpec(f"x{i}", "continuous", 0.0, 1.0) for i in range(dim)),
        outputs=(VariableSpec("y", "continuous", -1e6, 1e6),),
    )
