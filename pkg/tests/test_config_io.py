import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cohsim import io
from cohsim.config import SCENARIOS, ScenarioConfig, dump_config, parse_config
from cohsim.correlators import heterodyne_curve
from cohsim.errors import ConfigError, DomainError


class TestParse:
    def test_chsh_example(self):
        cfg = parse_config('{"scenario":"chsh","angles_deg":[0,45,-22.5,-67.5]}')
        assert cfg.angles_deg == [0.0, 45.0, -22.5, -67.5]

    def test_defaults(self):
        cfg = parse_config('{"scenario":"hom_classical"}')
        assert cfg.sigma == 5.0
        assert (cfg.ensemble.span_sigmas, cfg.ensemble.n_points) == (4.0, 161)
        assert cfg.optics.phi_deg == 0.0
        assert cfg.scan.tau_points == 241

    def test_montecarlo_defaults(self):
        cfg = parse_config({"scenario": "montecarlo"})
        assert cfg.source.pair_fraction == 0.01
        assert cfg.scan.tau_points == 13

    def test_even_grid(self):
        with pytest.raises(ConfigError, match="n_points must be odd"):
            parse_config('{"scenario":"hom_classical","ensemble":{"n_points":160}}')

    @pytest.mark.parametrize(
        "doc,key",
        [
            ({"scenario": "eraser", "colour": 1}, "colour"),
            ({"scenario": "eraser", "optics": {"xi": 3}}, "optics.xi"),
            ({"scenario": "montecarlo", "source": {"rate": 3}}, "source.rate"),
        ],
    )
    def test_unknown_keys(self, doc, key):
        with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
            parse_config(doc)

    @pytest.mark.parametrize(
        "doc,fragment",
        [
            ({}, "scenario"),
            ({"scenario": "bogus"}, "scenario"),
            ({"scenario": "eraser", "optics": {"xi_deg": "45"}}, "optics.xi_deg"),
            ({"scenario": "eraser", "ensemble": {"c": -1}}, "ensemble.c"),
            ({"scenario": "montecarlo", "source": {"pair_fraction": 2}}, "pair_fraction"),
            ({"scenario": "montecarlo", "source": {"window": 0}}, "window"),
            ({"scenario": "chsh", "angles_deg": [1, 2]}, "angles_deg"),
            ({"scenario": "eraser", "angles_deg": [0, 0, 0, 0]}, "angles_deg"),
            ({"scenario": "eraser", "source": {}}, "source"),
            ({"scenario": "eraser", "seed": -1}, "seed"),
            ({"scenario": "eraser", "output": {"format": "xml"}}, "format"),
            ({"scenario": "eraser", "ensemble": {"n_points": 161.5}}, "n_points"),
        ],
    )
    def test_errors_name_the_key(self, doc, fragment):
        with pytest.raises(ConfigError, match=fragment):
            parse_config(doc)

    def test_malformed_json(self):
        with pytest.raises(ConfigError):
            parse_config("{not json")

    def test_degrees_to_radians(self):
        cfg = parse_config({"scenario": "fields", "optics": {"xi_deg": 90, "tau": 2.0}})
        p = cfg.optics.to_params(cfg.sigma)
        assert p.xi == pytest.approx(math.pi / 2)
        assert p.tau == pytest.approx(2.0 / 5.0)


num = st.floats(-1e3, 1e3, allow_nan=False).map(lambda x: round(x, 6))


@st.composite
def configs(draw):
    scenario = draw(st.sampled_from(SCENARIOS))
    doc = {
        "scenario": scenario,
        "seed": draw(st.integers(0, 2**64 - 1)),
        "optics": {"xi_deg": draw(num), "theta_deg": draw(num), "phi_deg": draw(num), "tau": draw(num)},
        "ensemble": {"c": draw(st.floats(0.1, 50)), "n_points": draw(st.integers(1, 200)) * 2 + 1},
        "scan": {"tau_stop": draw(st.floats(0, 20)), "tau_points": draw(st.integers(1, 400))},
    }
    if scenario == "montecarlo":
        doc["source"] = {"pair_fraction": draw(st.floats(0, 1)), "duration": draw(st.floats(0, 1e6))}
    if scenario == "chsh":
        doc["angles_deg"] = draw(st.lists(num, min_size=4, max_size=4))
    return doc


@settings(max_examples=150)
@given(configs())
def test_round_trip(doc):
    cfg = parse_config(doc)
    again = parse_config(dump_config(cfg))
    assert again == cfg
    assert dump_config(again) == dump_config(cfg)


class TestEmit:
    def test_empty_curve_header_only(self):
        assert io.emit_csv(tau=[], values=[]) == "tau,value\n"

    def test_stderr_column(self):
        text = io.emit_csv(tau=[0, 1], values=[0.5, 0.25], stderr=[0.1, 0.2])
        assert text == "tau,value,stderr\n0,0.5,0.1\n1,0.25,0.2\n"

    def test_nine_significant_digits(self):
        text = io.emit_csv(tau=[1 / 3], values=[2 / 3])
        assert text.splitlines()[1] == "0.333333333,0.666666667"

    def test_negative_zero(self):
        assert io.fmt(-0.0) == "0"

    def test_deterministic(self):
        curve = heterodyne_curve(np.linspace(0, 1, 50), 0.3, 0.4, 5.0)
        assert io.emit_csv(curve) == io.emit_csv(curve)
        assert "\r" not in io.emit_csv(curve)

    def test_non_finite_refused(self):
        with pytest.raises(DomainError, match="row 2"):
            io.emit_csv(tau=[0, 1, 2], values=[0.0, 1.0, math.nan])

    def test_map_layout(self):
        text = io.emit_map("xi_deg", [0, 45], [0, 90], [[1, 0], [0.5, 0.5]])
        assert text == "xi_deg,0,90\n0,1,0\n45,0.5,0.5\n"

    def test_table_as_json(self):
        data = json.loads(io.table_as_json("tau,value\n0,1\n0.5,0.25\n"))
        assert data["columns"] == ["tau", "value"]
        assert data["data"]["value"] == [1, 0.25]
