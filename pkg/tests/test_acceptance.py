import io

import pytest

from qmeasure import acceptance

NAMES = {num: title.replace(" ", "_").replace("-", "_") for num, title, _ in acceptance.CRITERIA}


@pytest.mark.parametrize("number", sorted(NAMES), ids=[f"{n}_{NAMES[n]}" for n in sorted(NAMES)])
def test_criterion(number):
    res = acceptance.run_criterion(number)
    assert res.passed, res.line()


def test_line_format():
    res = acceptance.run_criterion(9)
    assert res.line().startswith("[PASS]  9 ")


def test_unknown_criterion():
    with pytest.raises(KeyError):
        acceptance.run_criterion(99)


def test_run_all_writes_one_line_each(monkeypatch):
    calls = []
    monkeypatch.setattr(acceptance, "run_criterion",
                        lambda n: calls.append(n) or acceptance.Outcome(n, "t", True, "ok", 0.0))
    buf = io.StringIO()
    acceptance.run_all(buf)
    assert calls == sorted(NAMES)
    assert len(buf.getvalue().splitlines()) >= len(NAMES)
