"""Scenario orchestration: one function per scenario, each returning named outputs."""
from __future__ import annotations

import json
import math
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.optimize import brentq

from . import __version__, correlators, io, montecarlo, optics
from .config import ScenarioConfig, config_to_dict
from .ensemble import GaussianSpec, gaussian_weight, make_grid


def _tau_grid(cfg: ScenarioConfig) -> np.ndarray:
    """Delay grid in units of 1/sigma."""
    s = cfg.scan
    return np.linspace(s.tau_start, s.tau_stop, s.tau_points)


def _grid(cfg: ScenarioConfig):
    e = cfg.ensemble
    return make_grid(GaussianSpec(e.a, e.b, e.c), e.span_sigmas, e.n_points)


def run_fields(cfg: ScenarioConfig):
    p = cfg.optics.to_params(cfg.sigma)
    closed = optics.mzi_output_fields(p)
    chain = optics.chain_output_fields(p)
    rows = []
    for fld, via in ((closed, "closed_form"), (chain, "element_chain")):
        for port in fld:
            for mode in optics.MODE_ORDER:
                amp = port[mode]
                rows.append([via, port.port, mode.symbol, amp.real, amp.imag, abs(amp) ** 2])
    proj_rows = []
    for port, angle in ((closed[0], p.xi), (closed[1], p.theta)):
        for sign, k in optics.polarizer_project(angle, port).items():
            proj_rows.append([port.port, "-" if sign < 0 else "+", k.real, k.imag])
    dev = max(
        float(np.max(np.abs(a.as_array() - b.as_array()))) for a, b in zip(closed, chain)
    )
    results = {
        "intensity_A": closed[0].intensity(),
        "intensity_B": closed[1].intensity(),
        "chain_max_abs_deviation": dev,
    }
    return {
        "fields": io.emit_table(["route", "port", "mode", "re", "im", "intensity"], rows),
        "projected": io.emit_table(["port", "detuning_sign", "re", "im"], proj_rows),
    }, results


def run_eraser(cfg: ScenarioConfig):
    p = cfg.optics.to_params(cfg.sigma)
    phi_deg = np.linspace(0.0, 360.0, cfg.scan.phi_points)
    i1, i2 = correlators.eraser_means(p.xi, p.theta, np.deg2rad(phi_deg))
    results = {
        "visibility_port1": correlators.visibility(i1),
        "visibility_port2": correlators.visibility(i2),
        "expected_visibility_port1": abs(math.sin(2 * p.xi)),
        "expected_visibility_port2": abs(math.sin(2 * p.theta)),
    }
    return {"eraser": io.emit_table(["phi_deg", "I1", "I2"], zip(phi_deg, i1, i2))}, results


def half_depth_delay(grid, xi, theta, phi) -> float:
    """Smallest delay where the classical curve reaches half its plateau (0.25)."""
    sigma = grid.sigma
    f = lambda t: correlators.classical_coincidence(grid, xi, theta, phi, t) - 0.25
    return brentq(f, 1e-9 / sigma, 1.0 / sigma, xtol=1e-14)


def run_hom_classical(cfg: ScenarioConfig):
    p = cfg.optics.to_params(cfg.sigma)
    grid = _grid(cfg)
    sigma = grid.sigma
    tau_u = _tau_grid(cfg)
    tau = tau_u / sigma
    norm = correlators.SINGLES_LEVEL**2
    products = correlators.spectral_products(grid, p.xi, p.theta, p.phi, tau) / norm
    dip = correlators.classical_coincidence(grid, p.xi, p.theta, p.phi, tau)
    slice_u = np.asarray(cfg.scan.slice_taus, dtype=float)
    slices = correlators.spectral_products(grid, p.xi, p.theta, p.phi, slice_u / sigma) / norm * grid.weights
    outputs = {
        "hom_matrix": io.emit_map("tau", tau_u, grid.points, products),
        "hom_dip": io.emit_csv(tau=tau_u, values=np.atleast_1d(dip)),
        "hom_weights": io.emit_table(
            ["delta_f", "gaussian", "weight"],
            zip(grid.points, gaussian_weight(grid.spec, grid.points), grid.weights),
        ),
        "hom_slices": io.emit_map("delta_f", grid.points, slice_u, slices.T),
    }
    results = {
        "sigma": sigma,
        "dip_at_zero": float(np.atleast_1d(dip)[0]) if tau_u[0] == 0 else None,
        "value_at_tau_stop": float(np.atleast_1d(dip)[-1]),
    }
    if abs(math.sin(2 * p.xi)) == 1 and abs(math.sin(2 * p.theta)) == 1 and p.phi == 0:
        results["half_depth_tau_sigma"] = half_depth_delay(grid, p.xi, p.theta, p.phi) * sigma
    return outputs, results


def run_hom_heterodyne(cfg: ScenarioConfig):
    p = cfg.optics.to_params(cfg.sigma)
    sigma = cfg.sigma
    tau_u = _tau_grid(cfg)
    g2 = correlators.quantum_g2(tau_u / sigma, p.xi, p.theta, sigma)
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
    n = cfg.scan.draws
    dfs = rng.normal(0.0, sigma, n)
    taus = rng.uniform(0.0, max(cfg.scan.tau_stop, 1.0) / sigma, n)
    phis = rng.uniform(0.0, 2 * math.pi, n)
    vals = np.array([correlators.heterodyne_pair(p.xi, p.theta, d, t, f)[0] for d, t, f in zip(dfs, taus, phis)])
    expected = math.cos(p.xi + p.theta) ** 2 / 16
    spread = float(vals.max() - vals.min())
    report = {
        "draws": n,
        "expected": expected,
        "min": float(vals.min()),
        "max": float(vals.max()),
        "max_abs_spread": spread,
        "max_relative_spread": spread / expected if expected > 0 else None,
        "max_abs_deviation_from_law": float(np.max(np.abs(vals - expected))),
    }
    outputs = {"hom_heterodyne": io.emit_csv(tau=tau_u, values=np.atleast_1d(g2))}
    return outputs, {"invariance": report, "g2_at_zero": float(correlators.quantum_g2(0.0, p.xi, p.theta, sigma))}


def run_corrmap(cfg: ScenarioConfig):
    p = cfg.optics.to_params(cfg.sigma)
    step = cfg.scan.angle_step_deg
    ang = np.arange(0.0, 180.0 + step / 2, step)
    rad = np.deg2rad(ang)
    m = np.array(
        [[correlators.heterodyne_pair(x, t, p.delta_f, p.tau, p.phi)[0] * 16 for t in rad] for x in rad]
    )
    return {"corrmap": io.emit_map("xi_deg", ang, ang, m)}, {"max": float(m.max()), "min": float(m.min())}


def run_chsh(cfg: ScenarioConfig):
    a, ap, b, bp = cfg.angles_deg
    terms = [("E(a,b)", a, b, 1), ("E(a,b')", a, bp, -1), ("E(a',b)", ap, b, 1), ("E(a',b')", ap, bp, 1)]
    rows = []
    for name, x, y, sign in terms:
        rows.append([name, x, y, sign, float(correlators.correlation_E(math.radians(x), math.radians(y)))])
    s = float(correlators.chsh_S(*(math.radians(v) for v in (a, ap, b, bp))))
    results = {"S": s, "tsirelson_bound": 2 * math.sqrt(2), "local_bound": 2.0, "violates_local_bound": abs(s) > 2}
    return {"chsh": io.emit_table(["term", "xi_deg", "theta_deg", "sign", "E"], rows)}, results


def run_montecarlo(cfg: ScenarioConfig):
    p = cfg.optics.to_params(cfg.sigma)
    src = cfg.source
    sigma = cfg.sigma
    scfg = montecarlo.SourceConfig(
        singles_rate=src.singles_rate,
        pair_fraction=src.pair_fraction,
        duration=src.duration,
        seed=cfg.seed,
        sigma=sigma,
        mean_photon_number=src.mean_photon_number,
        laser_linewidth=src.laser_linewidth,
    )
    tau_u = _tau_grid(cfg)
    curve, points = montecarlo.scan_tau(scfg, p, tau_u / sigma, src.window, workers=src.workers)
    grid = _grid(cfg)
    analytic = np.atleast_1d(correlators.classical_coincidence(grid, p.xi, p.theta, p.phi, tau_u / sigma))
    rows = []
    for tu, pt, ref in zip(tau_u, points, analytic):
        h = pt.histogram
        rows.append([tu, h.coincidences, h.singles[0], h.singles[1], h.n_pairs, montecarlo.accidental_expectation(h), ref])
    se = curve.stderr
    z = np.where(se > 0, (curve.values - analytic) / np.where(se > 0, se, 1), 0.0)
    outputs = {
        "mc_g2": io.emit_csv(tau=tau_u, values=curve.values, stderr=se),
        "mc_histogram": io.emit_table(
            ["tau", "coincidences", "singles_D1", "singles_D2", "pairs", "accidentals", "analytic"], rows
        ),
    }
    results = {
        "point_seeds": curve.metadata["seeds"],
        "streams": [pt.summary for pt in points],
        "max_abs_z_vs_analytic": float(np.max(np.abs(z))),
    }
    return outputs, results


RUNNERS: dict[str, Callable] = {
    "fields": run_fields,
    "eraser": run_eraser,
    "hom_classical": run_hom_classical,
    "hom_heterodyne": run_hom_heterodyne,
    "corrmap": run_corrmap,
    "chsh": run_chsh,
    "montecarlo": run_montecarlo,
}


def render(cfg: ScenarioConfig) -> tuple[dict[str, bytes], dict]:
    """Compute a scenario in memory: ``{filename: bytes}`` plus scalar results."""
    tables, results = RUNNERS[cfg.scenario](cfg)
    files = {}
    for name, text in tables.items():
        if cfg.output.format == "json":
            files[f"{name}.json"] = io.table_as_json(text).encode()
        else:
            files[f"{name}.csv"] = text.encode()
    files["summary.json"] = io.emit_json(results).encode()
    return files, results


def run_scenario(cfg: ScenarioConfig, out_dir=None) -> tuple[list[Path], dict]:
    """Write every output of ``cfg`` plus ``manifest.json`` into ``out_dir``."""
    out = Path(out_dir if out_dir is not None else cfg.output.path)
    files, results = render(cfg)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name, data in files.items():
        path = out / name
        path.write_bytes(data)
        paths.append(path)
    manifest = io.make_manifest(__version__, config_to_dict(cfg), cfg.seed, files)
    mpath = out / "manifest.json"
    mpath.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    paths.append(mpath)
    return paths, manifest
