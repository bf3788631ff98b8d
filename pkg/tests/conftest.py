from pathlib import Path

import numpy as np
import pytest

from augpet.corpus import Dataset, Example
from augpet.lexicons import EmbeddingTable

FIXTURES = Path(__file__).parent / "fixtures"

HOSPITAL_COMMENT = "Who is she.....may be she has escaped from some mental hospital..."


def write_embeddings(table: EmbeddingTable, path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for word, i in table.vocab.items():
            fh.write(word + " " + " ".join(repr(float(x)) for x in table.matrix[i]) + "\n")
    return path


def dataset(rows, labels=()) -> Dataset:
    return Dataset(tuple(Example(str(i), text, label) for i, (text, label) in enumerate(rows)), tuple(labels))


@pytest.fixture
def fixtures():
    return FIXTURES


@pytest.fixture
def alpha_beta():
    """Two-class corpus separable by a single planted token, with a tiny table."""
    rng = np.random.default_rng(0)
    table = EmbeddingTable.from_dict({w: rng.standard_normal(8) for w in ("alpha", "beta", "the", "a", "of", "and")})
    fillers = ["the", "a", "of", "and"]
    rows = []
    for i in range(200):
        label = "A" if i % 2 == 0 else "B"
        words = list(rng.choice(fillers, size=4)) + ["alpha" if label == "A" else "beta"]
        rng.shuffle(words)
        rows.append((" ".join(words), label))
    return dataset(rows, ("A", "B")), table


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
