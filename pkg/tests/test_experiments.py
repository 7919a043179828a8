import json
import time
import xml.etree.ElementTree as ET

import numpy as np
import pytest

import driftrec as dr
from driftrec.errors import ConfigurationError
from driftrec.experiments import (
    drift_hat,
    drift_parabolic_join,
    drift_plateau_ramp,
    drift_sawtooth,
    drift_sine,
    drift_staircase,
)


class TestPresets:
    def test_registry_names(self):
        assert dr.PRESET_NAMES == ("ex1a", "ex1b", "ex2c", "ex2d", "ex3e", "ex3f")
        with pytest.raises(ConfigurationError, match="ex1a"):
            dr.make_preset("bogus")

    def test_shared_coefficients(self):
        p = dr.make_preset("ex1a")
        assert p.spec.potential == 5.0
        assert p.spec.left_flux == 1.0
        assert p.spec.right_flux(0.5) == 1.5
        assert float(p.spec.source(np.array([1.0]))[0]) == 20.0
        assert float(p.spec.initial(np.array([0.5]))[0]) == pytest.approx(1.0)
        assert p.spec.horizon == 1.0
        assert p.solver_grid == (100, 100)
        assert p.noise is None and not p.mollify

    def test_shorter_horizon_presets(self):
        for name in ("ex2c", "ex2d"):
            p = dr.make_preset(name)
            assert p.spec.horizon == 0.5
            assert p.solver_grid == (100, 100)

    def test_noisy_presets(self):
        for name in ("ex3e", "ex3f"):
            p = dr.make_preset(name)
            assert p.spec.horizon == 1.0
            assert p.solver_grid == (20, 80)
            assert p.noise is not None and p.noise.level == 0.01 and p.noise.seed == 7
            assert p.mollify

    def test_overrides(self):
        p = dr.make_preset("ex3e", noise_level=0.03, seed=11, mollify=False,
                           grid_m=40, grid_n=60, refinement=2, data_points=501,
                           max_iter=9, tol_step=1e-6, lam=0.5)
        assert p.noise.level == 0.03 and p.noise.seed == 11
        assert not p.mollify
        assert p.solver_grid == (40, 60)
        assert p.data_grid_refinement == 2 and p.data_points == 501
        assert p.iteration.max_iter == 9 and p.iteration.tol_step == 1e-6
        assert p.tikhonov.lam == 0.5

    def test_drift_shapes(self):
        x = np.array([0.0, 0.1, 0.25, 0.3, 0.5, 0.6, 0.75, 0.8, 0.9, 1.0])
        assert np.allclose(drift_sine(x), np.sin(x))
        assert drift_parabolic_join(0.5) == pytest.approx(0.25)
        assert drift_parabolic_join(1.0) == pytest.approx(0.5)
        assert drift_hat(0.5) == pytest.approx(0.5)
        assert drift_hat(1.0) == pytest.approx(0.0)
        # sawtooth: -1 at the segment centers, +1 at the joins
        assert np.allclose(drift_sawtooth(np.array([0.1, 0.3, 0.5, 0.7, 0.9])), -1.0)
        assert np.allclose(drift_sawtooth(np.array([0.0, 0.2, 0.4, 0.6, 0.8, 1.0])), 1.0)
        assert np.array_equal(drift_staircase(np.array([0.1, 0.25, 0.3, 0.5, 0.6, 0.8])),
                              [0.0, 0.0, 1.0, 1.0, 0.0, 1.0])
        assert np.allclose(drift_plateau_ramp(np.array([0.1, 0.2, 0.5, 0.8, 0.9])),
                           [-1.0, 0.1, 0.25, 0.4, -1.0])


class TestGenerateData:
    def test_deterministic(self):
        a = dr.generate_data(dr.make_preset("ex3e"))
        b = dr.generate_data(dr.make_preset("ex3e"))
        assert np.array_equal(a, b)

    def test_exact_data_has_positive_slope(self):
        preset = dr.make_preset("ex1a", data_points=2001)
        g = dr.generate_data(preset)
        h = 1.0 / (g.size - 1)
        slope = (g[2:] - g[:-2]) / (2.0 * h)
        assert np.all(slope > 0.0)

    def test_refinement_changes_reconstruction(self):
        b1 = dr.run_experiment(dr.make_preset("ex1a", refinement=1, data_points=1001))
        b4 = dr.run_experiment(dr.make_preset("ex1a", refinement=4, data_points=1001))
        assert not np.array_equal(b1.q_recovered.values, b4.q_recovered.values)
        assert b1.provenance["inverse_crime_guard"] is False
        assert b4.provenance["inverse_crime_guard"] is True

    def test_refinement_below_one_rejected(self):
        with pytest.raises(ConfigurationError, match="refinement"):
            dr.make_preset("ex1a", refinement=0)


class TestRunExperiment:
    def test_accepts_preset_name(self):
        bundle = dr.run_experiment("ex1a")
        assert bundle.status == "ok"
        assert bundle.metrics["rel_l2"] <= 0.05
        assert len(bundle.trace.step_norms) <= 3

    def test_bundle_embeds_assumption_report(self):
        bundle = dr.run_experiment("ex1a")
        assert bundle.assumptions.clause_results["f"] == "warn"
        assert bundle.provenance["preset"] == "ex1a"
        assert bundle.provenance["tool_version"] == dr.__version__

    def test_rough_data_failure_is_captured(self):
        preset = dr.make_preset("ex3e", noise_level=0.5, seed=3, mollify=False)
        bundle = dr.run_experiment(preset)
        assert bundle.status == "failed"
        assert bundle.error is not None
        assert bundle.metrics is None


@pytest.fixture(scope="module")
def bundle_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("bundle")
    bundle = dr.run_experiment("ex3e", out_dir=out)
    return bundle, out


class TestEmitOutputs:

    def test_drift_csv_shape(self, bundle_dir):
        bundle, out = bundle_dir
        lines = (out / "drift.csv").read_text().strip().splitlines()
        header = lines[0].split(",")
        assert header[:2] == ["x", "q_true"]
        assert header[2] == "q_0"
        assert len(lines) == 1 + 21
        for line in lines[1:]:
            for cell in line.split(","):
                float(cell)  # locale-independent '.' decimals

    def test_solution_csv_columns(self, bundle_dir):
        _, out = bundle_dir
        lines = (out / "solution.csv").read_text().strip().splitlines()
        assert lines[0] == "x,g_exact,g_noisy,g_mollified"
        assert len(lines) == 1 + 21

    def test_trace_json_round_trip(self, bundle_dir):
        bundle, out = bundle_dir
        doc = json.loads((out / "trace.json").read_text())
        assert doc["metrics"]["rel_l2"] == bundle.metrics["rel_l2"]
        assert doc["metrics"]["rel_linf"] == bundle.metrics["rel_linf"]
        assert doc["iteration"]["step_norms"] == [float(s) for s in bundle.trace.step_norms]
        assert doc["mollification"]["lambda"] == bundle.mollification["lambda"]
        assert doc["provenance"] == json.loads(json.dumps(bundle.provenance))

    def test_svg_structure(self, bundle_dir):
        _, out = bundle_dir
        tree = ET.parse(out / "figure-ex3e.svg")
        ns = "{http://www.w3.org/2000/svg}"
        polylines = tree.getroot().findall(f".//{ns}polyline")
        assert len(polylines) == 2  # true and recovered drift

    def test_unknown_format_rejected(self, bundle_dir):
        bundle, out = bundle_dir
        with pytest.raises(ConfigurationError, match="format"):
            dr.emit_outputs(bundle, out, formats=("pdf",))

    def test_failed_run_still_emits(self, tmp_path):
        preset = dr.make_preset("ex3e", noise_level=0.5, seed=3, mollify=False)
        bundle = dr.run_experiment(preset, out_dir=tmp_path)
        doc = json.loads((tmp_path / "trace.json").read_text())
        assert doc["status"] == "failed"
        assert doc["metrics"] is None
        lines = (tmp_path / "drift.csv").read_text().strip().splitlines()
        assert lines[0] == "x,q_true"


class TestDeterminism:
    def test_bundle_files_identical(self, tmp_path):
        preset = dr.make_preset("ex3e", data_points=2001)
        dr.run_experiment(preset, out_dir=tmp_path / "a")
        dr.run_experiment(preset, out_dir=tmp_path / "b")
        for name in ("drift.csv", "solution.csv", "trace.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


class TestSuite:
    def test_all_presets_complete(self, tmp_path):
        start = time.perf_counter()
        results = dr.run_suite(tmp_path, formats=("json",))
        assert time.perf_counter() - start < 300.0
        assert set(results) == set(dr.PRESET_NAMES)
        for name, bundle in results.items():
            assert bundle.status == "ok", f"{name} failed: {bundle.error}"
            assert (tmp_path / name / "trace.json").exists()

    def test_noise_override_mollifies_by_default(self):
        p = dr.make_preset("ex1a", noise_level=0.01)
        assert p.mollify
        assert not dr.make_preset("ex1a", noise_level=0.01, mollify=False).mollify
