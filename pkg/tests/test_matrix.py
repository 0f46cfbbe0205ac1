import pytest

from semishadow.core import DomainError
from semishadow.matrix import (CLASSES, REFERENCE_MARKS, evidence, implication_matrix, pseudo_type,
                               registered_systems, test_pseudos as class_pseudos)


@pytest.fixture(scope="module")
def result():
    return implication_matrix(registered_systems(128))


def _system(name):
    return next(s for s in registered_systems(128) if s.name == name)


def test_diagonal_consistent(result):
    for c in CLASSES:
        assert result["cells"][(c, c)]["value"] == "consistent"


def test_no_conflicting_evidence(result):
    for name, ev in result["evidence"].items():
        for cls, e in ev.items():
            assert e["status"] != "conflict", (name, cls)


def test_single_to_uniform_counterexample(result):
    cell = result["cells"][("SA", "SU")]
    assert cell["value"] == "counterexample-found"
    assert "cyclic-g-and-inverse" in cell["systems"]


def test_question_cells_need_evidence(result):
    for i, row in enumerate(CLASSES):
        for j, col in enumerate(CLASSES):
            if REFERENCE_MARKS[row][j] != "?":
                continue
            cell = result["cells"][(row, col)]
            if cell["value"] == "consistent":
                assert cell["systems"], (row, col)


def test_reference_marks_are_annotations(result):
    cell = result["cells"][("UU", "UA")]
    assert cell["reference"] == "+"
    assert cell["value"] in ("consistent", "counterexample-found", "no-evidence")


def test_cyclic_g_is_not_average_shadowable():
    ev = evidence(_system("cyclic-g"))
    assert ev["AA"]["status"] == "out"
    assert ev["SA"]["status"] == "out"


def test_doubling_is_in_uniform_classes():
    ev = evidence(_system("doubling"))
    assert ev["UU"]["status"] == "in" and ev["SL"]["status"] == "in"


def test_class_pseudos_have_their_type():
    for s in registered_systems(128):
        for alpha in "UAS":
            for y in class_pseudos(s, alpha):
                assert alpha in pseudo_type(s, y)


def test_needs_two_systems():
    with pytest.raises(DomainError):
        implication_matrix(registered_systems(128)[:1])
