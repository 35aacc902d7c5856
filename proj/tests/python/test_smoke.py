import os
import pathlib

import pytest

import atlforge

ROOT = pathlib.Path(os.environ.get("ATLFORGE_SOURCE_DIR", pathlib.Path(__file__).resolve().parents[2]))
MODELS = ROOT / "models"


def read(name):
    return (MODELS / name).read_text()


@pytest.fixture(scope="module")
def goldseeker():
    return atlforge.Model(read("goldseeker.ispl"))


def test_model_summary(goldseeker):
    assert goldseeker.agents == ["BA", "RA"]
    assert len(goldseeker.variables) == 7
    assert goldseeker.formulas[0].startswith("<g1> F(")


def test_parse_error_has_location():
    text = read("flip.ispl").replace("<ag1> G(p);", "<ag1> G(q);")
    with pytest.raises(atlforge.ParseError, match="31:"):
        atlforge.Model(text)


def test_check_flip():
    flip = atlforge.Model(read("flip.ispl"))
    result = flip.check("<ag1> X(!p)", {"p": True})
    assert result["holds"]
    assert "joint (b," in result["witness"]
    assert not flip.check("<ag1> G(p)", {"p": False})["holds"]
    assert flip.check("<ag1> G(p)", {"p": [True]})["holds"]


def test_generate_fixed_positions(goldseeker):
    out = goldseeker.generate_plans(
        "BA",
        goals=[("gettreasure", "1", "")],
        fixed={"treasureMined": False, "rowBA": 3, "columnBA": 2, "rowRA": 3, "columnRA": 2},
        initials={"BA.mined": False, "RA.mined": False},
    )
    assert out["plans"] == 1
    plans = atlforge.load_plans(out["text"])
    assert plans[0]["body"] == ["mine"]
    assert plans[0]["goal"] == "gettreasure"
    assert atlforge.roundtrip_plans(out["text"]) == out["text"]


def test_generate_rejects_unknown_agent(goldseeker):
    with pytest.raises(atlforge.Error):
        goldseeker.generate_plans("ZA", initials={"BA.mined": False, "RA.mined": False})


def test_count_beliefs():
    assert atlforge.count_beliefs([4, 3, 4, 3]) == 11025
    assert atlforge.count_beliefs([2]) == 3


def test_replay():
    out = atlforge.replay(read("goldseeker.trace"), {"BA": (1, 0), "RA": (0, 1)})
    assert out["error"] is None
    assert out["failures"] == []
    assert out["expectations"] > 20
    assert out["trace"].startswith("step 1\n")
