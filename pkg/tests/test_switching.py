import pytest

from leochunk.switching import (
    SwitchFabric,
    builtin_fabrics,
    lookup,
    path_insertion_loss,
    path_switching_delay,
)


def test_catalog_values():
    table = {f.name: (f.switch_time_s, f.power_w, f.insertion_loss_db, f.trl) for f in builtin_fabrics()}
    assert table == {
        "POLATIS": (25e-3, 5.0, 1.0, 9),
        "GLSUN": (8e-3, 1.25, 2.6, 9),
        "AGILTRON": (0.1e-6, 10.0, 3.5, 9),
        "InP-SOA": (5.2e-9, 0.58, 0.0, 4),
    }


def test_lookup_case_insensitive_and_custom():
    assert lookup("inp-soa").name == "InP-SOA"
    mine = SwitchFabric("MEMS-X", 1e-3, 2.0, 0.5, 6)
    assert lookup("mems-x", {"MEMS-X": mine}) is mine
    with pytest.raises(KeyError, match="POLATIS, GLSUN, AGILTRON, InP-SOA"):
        lookup("nope")


def test_path_totals_scale_with_satellites():
    f = lookup("GLSUN")
    assert path_switching_delay(f, 3) == pytest.approx(24e-3)
    assert path_insertion_loss(f, 3) == pytest.approx(7.8)
    assert path_switching_delay(f, 0) == 0.0
    with pytest.raises(ValueError):
        path_switching_delay(f, -1)


@pytest.mark.parametrize("kw", [dict(switch_time_s=0), dict(power_w=-1), dict(insertion_loss_db=-0.1)])
def test_invalid_fabric(kw):
    base = dict(name="x", switch_time_s=1e-3, power_w=1.0, insertion_loss_db=0.0, trl=5)
    base.update(kw)
    with pytest.raises(ValueError):
        SwitchFabric(**base)
