import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from reporteval import EvalCase, Report, Source, kernels  # noqa: E402


@pytest.fixture(scope="session", autouse=True)
def warm_kernels():
    # JIT compilation happens once here so timed tests measure steady state.
    kernels.warmup()


def make_case(case_id, candidate_text, reference_text, model_tag=None):
    return EvalCase(
        case_id=case_id,
        candidate=Report.from_text(f"{case_id}/c", Source.MODEL, candidate_text, model_tag),
        reference=Report.from_text(f"{case_id}/r", Source.HUMAN, reference_text),
    )


@pytest.fixture
def case_factory():
    return make_case
