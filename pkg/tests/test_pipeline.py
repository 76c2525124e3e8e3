import pytest

from editseq.pipeline import Config, ConfigError, mine
from editseq.template import isomorphic
from golden import ADD_PROPERTY_TEMPLATES


def test_config_defaults():
    c = Config()
    assert (c.n, c.support, c.debounce_ms, c.t1, c.t2, c.gamma, c.folds) == (3, 2, 500, 0.7, 0.8, 3.0, 5)


@pytest.mark.parametrize(
    "changes",
    [{"n": 0}, {"support": 1}, {"t1": 1.5}, {"t2": -0.1}, {"gamma": 0}, {"folds": 1}, {"max_diff_nodes": 0}, {"debounce_ms": -1}],
)
def test_config_invariants(changes):
    with pytest.raises(ConfigError):
        Config().replace(**changes)


def test_config_from_mapping():
    c = Config.from_mapping({"max-diff-nodes": "40", "t1": "0.5", "seed": 7})
    assert (c.max_diff_nodes, c.t1, c.seed) == (40, 0.5, 7)
    with pytest.raises(ConfigError):
        Config.from_mapping({"bogus": 1})
    with pytest.raises(ConfigError):
        Config.from_mapping({"n": "three"})


def test_mine_empty_corpus():
    r = mine([])
    assert r.selected == [] and r.candidates == [] and r.records() == []


def test_mine_selects_add_property(mined):
    ranked = [c.esp for c in mined.selected]
    assert any(e.templates == ADD_PROPERTY_TEMPLATES for e in ranked)
    recs = mined.records()
    assert [r.rank for r in recs] == list(range(1, len(recs) + 1))


def test_mine_is_deterministic(typed, copied, mined):
    again = mine([typed, copied])
    assert [c.esp for c in again.selected] == [c.esp for c in mined.selected]
    assert [str(c.sketch) for c in again.selected] == [str(c.sketch) for c in mined.selected]


def test_precision_filter_drops_add_property_with_diverging(typed, copied, diverging):
    # two correct, one wrong on the training traces: 2/3 is under t2 = 0.8
    r = mine([typed, copied, diverging])
    assert not any(len(c.esp.templates) == 3 and c.esp.templates[2].post.label == "Block" for c in r.selected)
    base = r.select(0.0, 0.0)
    assert len(base) >= len(r.selected)


def test_support_threshold_prunes(typed, copied, mined):
    r = mine([typed, copied], Config(support=3))
    assert len(r.candidates) < len(mined.candidates)
    assert all(str(c.sketch) != "InsertPropertyDecl.InsertParameter.InsertAssign" for c in r.candidates)
