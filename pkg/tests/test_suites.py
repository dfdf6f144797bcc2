import pytest

from chaoslab.errors import UnknownConstruction
from chaoslab.suites import Check, SUITES, _lookup, run_suite, suite_names

MATCHING = ["idioq", "manjoza", "primer", "primexsimex", "pripazise", "propa", "rdc", "rikardinjo",
            "series-criterion", "tekma", "zelje"]


@pytest.mark.parametrize("name", MATCHING)
def test_suite_matches_expected_table(name):
    res = run_suite(name)
    assert res.ok, res.diff()
    assert res.checks


def test_manjoza_uses_its_waiver():
    res = run_suite("manjoza")
    assert [c.status for c in res.checks].count("waived") == 1


def test_tekma_prim_reports_the_slope_mismatch():
    res = run_suite("tekma-prim", {"J": 20000})
    assert not res.ok
    assert [c.name for c in res.checks if c.status == "mismatch"] == ["fitted slope >= 0.175"]
    stirling = [c for c in res.checks if c.name.startswith("Stirling")]
    assert len(stirling) == 2 and all(c.status == "match" for c in stirling)


def test_aliases_and_unknown_names():
    assert run_suite("rikardinjo-tekma").ok
    assert "series" in suite_names() and set(SUITES) <= set(suite_names())
    with pytest.raises(UnknownConstruction):
        run_suite("nothing")


def test_check_status_rules():
    assert Check("a", "Satisfied", "Satisfied").status == "match"
    assert Check("a", "Satisfied", "Inconclusive", waiver="slow").status == "waived"
    assert Check("a", "Satisfied", "Inconclusive").status == "mismatch"
    assert Check("a", "Satisfied", "Refuted", waiver="slow").status == "mismatch"


def test_templated_expected_keys():
    table = {"DC1 lambda={lam}": "Satisfied", "plain": "x"}
    assert _lookup(table, "DC1 lambda=0.5") == "Satisfied"
    assert _lookup(table, "plain") == "x"
    assert _lookup(table, "DC2 lambda=0.5") is None
