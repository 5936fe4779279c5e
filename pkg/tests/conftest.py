import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from sqsdp import corpus


def corpus_problems():
    """Small cross-section of the built-in problems for per-problem suites."""
    return [
        corpus.problem_no_kkt(),
        corpus.problem_degenerate(3, 7),
        corpus.problem_degenerate(5, 1),
        corpus.problem_random_smooth(3, 2, 3, 11),
        corpus.problem_random_smooth(2, 1, 2, 5),
    ]


@pytest.fixture(scope="session")
def corpus_list():
    return corpus_problems()
