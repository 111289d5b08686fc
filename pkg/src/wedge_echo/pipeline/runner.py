"""Scan orchestration: classical, quantum and perturbative legs.

Each leg writes deterministic CSV artifacts (and optional SVG analogs)
into the output directory and reports into a shared RunManifest.  Leg
failures are recorded there without aborting the other legs.
"""

from __future__ import annotations

import math
import os
import time
from typing import Dict, List, Optional

import numpy as np

from ..classical import (
    classical_echo,
    bounce_time_stats,
    lyapunov_exponent,
    microcanonical_states,
    poincare_section,
    sample_thermal_classical,
)
from ..classical.thermal import ThermalSample
from ..errors import WedgeEchoError
from ..ldos import (
    OMEGA_DOWN_DOWN,
    OMEGA_UP_DOWN,
    ldos_profile,
    overlap_matrix,
    perturbative_echo,
    select_omega_convention,
)
from ..model import BilliardSpec, PerturbationSpec, build_potential, hard_wall_limit
from ..quantum import (
    calibrate_dt,
    design_grid,
    discretize,
    eigenstates,
    eigenstate_echo_grid,
    thermal_echo,
    thermal_weights,
)
from .config import RunConfig
from .manifest import RunManifest
from .svg import PlotStyle, Series, emit_plot

_SPECTRAL_EPS_MAX = 0.3  # above this, solve no up-basis; go straight to grid


def _fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return repr(float(x))


def write_csv(path: str, columns: List[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(columns) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(v) for v in row) + "\n")


def _resolve_e_clip(cfg: RunConfig, spec: BilliardSpec) -> float:
    th = cfg.section("thermal")
    e_clip = float(th.get("e_clip", 12.0))
    if e_clip <= 0.0:
        # sentinel: clip at the sheet-end escape energy
        u = spec.units
        e_clip = 0.98 * u.mass * u.gravity * spec.sheet_length * math.cos(spec.alpha)
    return e_clip


def _thermal_sample(cfg: RunConfig, spec: BilliardSpec, sub_seed: int) -> ThermalSample:
    th = cfg.section("thermal")
    seed = int(np.random.SeedSequence((cfg.seed, sub_seed)).generate_state(1)[0])
    return sample_thermal_classical(
        spec,
        float(th.get("temperature", 1.3)),
        _resolve_e_clip(cfg, spec),
        int(th.get("n_samples", 4000)),
        seed=seed,
    )


class QuantumWorkspace:
    """Shared grid/basis state for the quantum and perturbative legs."""

    def __init__(self, cfg: RunConfig):
        self.cfg = cfg
        self.spec = cfg.billiard_spec()
        gsec = cfg.section("grid")
        self.e_top = float(gsec.get("e_top", 12.5))
        self.grid, self.conf = design_grid(
            self.spec,
            self.e_top,
            int(gsec.get("nx", 128)),
            int(gsec.get("nz", 128)),
            pad=float(gsec.get("pad", 3.5)),
        )
        qsec = cfg.section("quantum")
        self.k_states = int(qsec.get("k_states", 120))
        self.k_states_up = int(qsec.get("k_states_up", self.k_states + 30))
        self._h = {}
        self._basis = {}
        self.convergence: Dict = {}

    def hamiltonian(self, epsilon: float, branch: str):
        key = (round(float(epsilon), 12), branch)
        if key not in self._h:
            pot = build_potential(self.spec, PerturbationSpec(key[0]), branch)
            self._h[key] = discretize(pot, self.grid, self.conf)
        return self._h[key]

    def basis(self, epsilon: float, branch: str, k: Optional[int] = None):
        if k is None:
            k = self.k_states if branch == "down" else self.k_states_up
        key = (round(float(epsilon), 12), branch, k)
        if key not in self._basis:
            t0 = time.time()
            b = eigenstates(self.hamiltonian(epsilon, branch), key[2])
            self.convergence[f"basis_{branch}_{key[0]:g}"] = {
                "res_max": float(b.residuals.max()),
                "solver": b.meta["solver"],
                "seconds": round(time.time() - t0, 2),
            }
            self._basis[key] = b
        return self._basis[key]

    def tau_grid(self) -> np.ndarray:
        q = self.cfg.section("quantum")
        tau_max = float(q.get("tau_max", 13.7))
        n_tau = int(q.get("n_tau", 16))
        return np.linspace(0.0, tau_max, n_tau)

    def dt(self, eps_max: float) -> float:
        q = self.cfg.section("quantum")
        if q.get("dt"):
            self.convergence.setdefault("dt", {"value": float(q["dt"]), "halvings": 0})
            return float(q["dt"])
        if "dt" not in self.convergence:
            basis = self.basis(0.0, "down")
            weights = thermal_weights(
                basis.energies,
                float(self.cfg.section("thermal").get("temperature", 1.3)),
                _resolve_e_clip(self.cfg, self.spec),
                self.spec.units.k_b,
            )
            n_cal = int(np.argmax(weights))
            tau_ref = float(self.tau_grid()[-1])
            dt, halvings = calibrate_dt(
                basis.state(n_cal),
                self.hamiltonian(0.0, "down"),
                self.hamiltonian(eps_max, "up"),
                tau_ref,
            )
            self.convergence["dt"] = {"value": dt, "halvings": halvings}
        return self.convergence["dt"]["value"]


# -- legs ------------------------------------------------------------------


def run_classical_leg(cfg: RunConfig, out: str, manifest: RunManifest) -> None:
    spec = cfg.billiard_spec()
    csec = cfg.section("classical")
    files = []

    if cfg.figure == "fig1":
        # sections for the chaotic and mixed angles side by side
        for tag, alpha_deg in (("chaotic", 52.5), ("mixed", 31.0)):
            spec_t = BilliardSpec(
                alpha=math.radians(alpha_deg),
                wall_model="hard",
                sheet_length=spec.sheet_length,
                gravity_on=spec.gravity_on,
                units=spec.units,
            )
            e_sec = float(csec.get("section_energy", 4.0))
            seed = int(np.random.SeedSequence((cfg.seed, 2)).generate_state(1)[0])
            initials = microcanonical_states(spec_t, e_sec, 24, seed=seed)
            n_b = int(csec.get("n_section_bounces", 100000)) // 24
            sos = poincare_section(spec_t, initials, n_bounces=max(n_b, 500))
            rows = []
            for tid, pts in enumerate(sos.points):
                for bi, (vt, vn) in enumerate(pts):
                    rows.append((tid, bi, vt, vn))
            path = os.path.join(out, f"sos_{tag}.csv")
            write_csv(path, ["trajectory_id", "bounce_index", "v_t", "v_n"], rows)
            files.append(path)
            if cfg.emit_svg:
                stacked = sos.stacked()
                svg = emit_plot(
                    {"v_t": stacked[:, 0], "v_n": stacked[:, 1]},
                    PlotStyle(
                        series=[Series(x="v_t", y="v_n", kind="scatter")],
                        x_label="tangential speed / sqrt(2E/m)",
                        y_label="normal speed / sqrt(2E/m)",
                        title=f"collision section, {tag} wedge",
                    ),
                )
                spath = os.path.join(out, f"fig1_{tag}.svg")
                with open(spath, "w", encoding="utf-8") as fh:
                    fh.write(svg)
                files.append(spath)

    sample = _thermal_sample(cfg, spec, 1)

    horizon = float(csec.get("horizon", 60.0 * spec.units.time_scale))
    stats = bounce_time_stats(spec, sample, horizon=horizon)
    path = os.path.join(out, "bounce_hist.csv")
    write_csv(
        path,
        ["bin_left", "bin_right", "mass"],
        zip(stats.bin_edges[:-1], stats.bin_edges[1:], stats.mass),
    )
    files.append(path)
    path = os.path.join(out, "bounce_summary.csv")
    write_csv(
        path,
        ["mean", "n_intervals", "n_failures", "temperature", "e_clip"],
        [(stats.mean, stats.n_intervals, stats.n_failures,
          sample.temperature, sample.e_clip)],
    )
    files.append(path)
    manifest.decisions["tau_bounce"] = stats.mean

    if "lambda_threshold" in csec:
        thr = float(csec["lambda_threshold"])
        spec_h = hard_wall_limit(spec)
        sample_h = _thermal_sample(cfg, spec_h, 3)
        rows = []
        n_reg, n_tot = 0.0, 0.0
        for i in range(sample_h.n):
            from ..classical import ClassicalState

            est = lyapunov_exponent(
                spec_h, ClassicalState(*sample_h.states[i]),
                float(csec.get("horizon", 1500.0)),
            )
            rows.append((i, est.rate if est.available else float("nan"), est.status))
            if est.available:
                n_tot += sample_h.weights[i]
                if est.rate < thr:
                    n_reg += sample_h.weights[i]
        path = os.path.join(out, "lyapunov.csv")
        write_csv(path, ["member", "lambda", "status"], rows)
        files.append(path)
        manifest.decisions["regular_fraction"] = (
            n_reg / n_tot if n_tot > 0 else float("nan")
        )

    # survival echo over the quantum tau grid (or a default one)
    q = cfg.section("quantum")
    tau_max = float(q.get("tau_max", 13.7))
    tau_grid = np.linspace(0.0, tau_max, int(q.get("n_tau", 16)))
    rc = classical_echo(spec, sample, tau_grid)
    path = os.path.join(out, "classical_echo.csv")
    write_csv(
        path,
        ["tau", "F_cl", "P_up"],
        zip(rc.tau, np.real(rc.f_echo), rc.p_up),
    )
    files.append(path)

    for f in files:
        manifest.add_file(f)
    manifest.decisions["horizon_factor"] = rc.meta["horizon_factor"]


def run_quantum_leg(cfg: RunConfig, out: str, manifest: RunManifest,
                    ws: Optional[QuantumWorkspace] = None) -> QuantumWorkspace:
    ws = ws or QuantumWorkspace(cfg)
    eps_list = cfg.epsilon_list()
    tau_grid = ws.tau_grid()
    dt = ws.dt(max(eps_list))
    th = cfg.section("thermal")
    temperature = float(th.get("temperature", 1.3))
    e_clip = _resolve_e_clip(cfg, ws.spec)

    basis_dn = ws.basis(0.0, "down")
    path = os.path.join(out, "spectrum_down.csv")
    write_csv(
        path,
        ["index", "energy", "residual"],
        zip(range(basis_dn.k), basis_dn.energies, basis_dn.residuals),
    )
    manifest.add_file(path)

    q = cfg.section("quantum")
    tau_fixed = q.get("tau_fixed")
    rows_echo = []
    rows_scan = []
    for eps in eps_list:
        basis_up = None
        if eps <= _SPECTRAL_EPS_MAX:
            basis_up = ws.basis(eps, "up")
        grid_tau = tau_grid if tau_fixed is None else np.array([0.0, float(tau_fixed)])
        res = thermal_echo(
            ws.basis(0.0, "down"),
            ws.hamiltonian(0.0, "down"),
            ws.hamiltonian(eps, "up"),
            temperature,
            e_clip,
            grid_tau,
            dt,
            epsilon=eps,
            method="auto",
            basis_up=basis_up,
        )
        manifest.convergence[f"echo_eps_{eps:g}"] = {
            "method": res.meta["method"],
            "max_up_deficit": res.meta.get("max_up_deficit"),
        }
        for j, tau in enumerate(res.tau):
            rows_echo.append(
                (tau, np.real(res.f_echo[j]), np.imag(res.f_echo[j]),
                 res.p_up[j], res.n_states, eps)
            )
        if tau_fixed is not None:
            rows_scan.append((eps, float(tau_fixed), res.p_up[-1], res.meta["method"]))

    path = os.path.join(out, "echo.csv")
    write_csv(
        path, ["tau", "Re_F", "Im_F", "P_up", "n_states", "epsilon"], rows_echo
    )
    manifest.add_file(path)
    if rows_scan:
        path = os.path.join(out, "echo_scan.csv")
        write_csv(path, ["epsilon", "tau_fixed", "P_up", "method"], rows_scan)
        manifest.add_file(path)

    if cfg.figure == "fig3":
        # saturation plot with the survival-model dashed line, plus the
        # strong-perturbation decay against the classical curve
        sample = _thermal_sample(cfg, ws.spec, 1)
        rc_fix = classical_echo(ws.spec, sample, np.array([float(tau_fixed)]))
        p_cl_fix = float(rc_fix.p_up[0])
        if cfg.emit_svg and rows_scan:
            eps_col = [r[0] for r in rows_scan]
            svg = emit_plot(
                {
                    "epsilon": eps_col,
                    "P_up": [r[2] for r in rows_scan],
                    "P_cl": [p_cl_fix] * len(rows_scan),
                },
                PlotStyle(
                    series=[
                        Series(x="epsilon", y="P_up", kind="scatter", label="echo"),
                        Series(x="epsilon", y="P_cl", kind="dashed",
                               label="survival model"),
                    ],
                    x_label="perturbation strength",
                    y_label="P_up",
                    title="saturation of the echo decay",
                    log_x=True,
                ),
            )
            spath = os.path.join(out, "fig3.svg")
            with open(spath, "w", encoding="utf-8") as fh:
                fh.write(svg)
            manifest.add_file(spath)

        eps_strong = max(eps_list)
        res_strong = thermal_echo(
            ws.basis(0.0, "down"),
            ws.hamiltonian(0.0, "down"),
            ws.hamiltonian(eps_strong, "up"),
            temperature,
            e_clip,
            tau_grid,
            dt,
            epsilon=eps_strong,
            method="grid",
        )
        rc = classical_echo(ws.spec, sample, tau_grid)
        path = os.path.join(out, "fig3_inset.csv")
        write_csv(
            path,
            ["tau", "P_up_quantum", "P_up_classical", "epsilon"],
            zip(tau_grid, res_strong.p_up, rc.p_up,
                [eps_strong] * len(tau_grid)),
        )
        manifest.add_file(path)
        if cfg.emit_svg:
            svg = emit_plot(
                {"tau": list(tau_grid), "quantum": list(res_strong.p_up),
                 "classical": list(rc.p_up)},
                PlotStyle(
                    series=[
                        Series(x="tau", y="quantum", kind="scatter",
                               label="echo, strong"),
                        Series(x="tau", y="classical", kind="line",
                               label="survival model"),
                    ],
                    x_label="tau", y_label="P_up",
                    title="strong perturbation vs classical survival",
                ),
            )
            spath = os.path.join(out, "fig3_inset.svg")
            with open(spath, "w", encoding="utf-8") as fh:
                fh.write(svg)
            manifest.add_file(spath)

    if cfg.emit_svg and tau_fixed is None:
        table: Dict[str, list] = {"tau": list(tau_grid)}
        series = []
        for eps in eps_list:
            col = f"P_up_{eps:g}"
            table[col] = [r[3] for r in rows_echo if r[5] == eps]
            series.append(Series(x="tau", y=col, kind="line", label=f"eps={eps:g}"))
        # overlay the strong-perturbation limit: the survival model
        sample = _thermal_sample(cfg, ws.spec, 1)
        rc = classical_echo(ws.spec, sample, tau_grid)
        table["P_survival"] = list(rc.p_up)
        series.append(Series(x="tau", y="P_survival", kind="dashed",
                             label="survival limit"))
        svg = emit_plot(
            table,
            PlotStyle(series=series, x_label="tau", y_label="P_up",
                      title="echo decay"),
        )
        spath = os.path.join(out, f"{cfg.figure or 'echo'}.svg")
        with open(spath, "w", encoding="utf-8") as fh:
            fh.write(svg)
        manifest.add_file(spath)
    return ws


def run_perturbative_leg(cfg: RunConfig, out: str, manifest: RunManifest,
                         ws: Optional[QuantumWorkspace] = None) -> None:
    ws = ws or QuantumWorkspace(cfg)
    eps_list = [e for e in cfg.epsilon_list() if e <= _SPECTRAL_EPS_MAX]
    if not eps_list:
        manifest.notes.append("perturbative leg skipped: no weak epsilon in list")
        return
    eps = min(eps_list)
    basis_dn = ws.basis(0.0, "down")
    basis_up = ws.basis(eps, "up")
    o = overlap_matrix(basis_dn, basis_up)

    th = cfg.section("thermal")
    weights = thermal_weights(
        basis_dn.energies,
        float(th.get("temperature", 1.3)),
        _resolve_e_clip(cfg, ws.spec),
        ws.spec.units.k_b,
    )
    e_ref = float(np.sum(weights * basis_dn.energies))
    # 10% of the reference energy or 20 states, whichever is larger
    gaps = np.abs(basis_dn.energies - e_ref)
    n_shell = min(20, basis_dn.k)
    window = max(0.1 * e_ref, 2.0 * float(np.sort(gaps)[n_shell - 1]) + 1e-9)
    prof = ldos_profile(o, e_ref=e_ref, window=window)
    path = os.path.join(out, "ldos.csv")
    write_csv(
        path, ["offset_energy", "mean_sq_overlap"], zip(prof.offsets, prof.density)
    )
    manifest.add_file(path)
    manifest.decisions["ldos_bandwidth"] = prof.bandwidth

    # weak-coupling echo for the few most thermally occupied states,
    # with the frequency-ladder convention fixed against the exact echo
    idx = list(np.argsort(weights)[::-1][:3])
    tau_grid = ws.tau_grid()
    dt = ws.dt(max(cfg.epsilon_list()))
    f_exact = eigenstate_echo_grid(
        basis_dn.states[idx], basis_dn.energies[idx],
        ws.hamiltonian(0.0, "down"), ws.hamiltonian(eps, "up"),
        tau_grid, dt,
    )
    sel = select_omega_convention(o, f_exact, idx, tau_grid)
    manifest.decisions["omega_convention"] = sel
    rows = []
    for row, n in enumerate(idx):
        f_p = perturbative_echo(o, n, tau_grid, convention=sel["convention"])
        for j, tau in enumerate(tau_grid):
            rows.append((tau, np.real(f_p[j]), np.imag(f_p[j]), n,
                         sel["convention"]))
    path = os.path.join(out, "pert_echo.csv")
    write_csv(
        path, ["tau", "Re_F_pert", "Im_F_pert", "state_index", "convention"], rows
    )
    manifest.add_file(path)


def run_scan(cfg: RunConfig, out_dir: Optional[str] = None) -> RunManifest:
    """Execute the configured legs; write artifacts plus manifest.json."""
    out = out_dir or cfg.out_dir
    os.makedirs(out, exist_ok=True)
    manifest = RunManifest(config_hash=cfg.config_hash(), seed=cfg.seed)
    cfg_path = os.path.join(out, "config.json")
    with open(cfg_path, "w", encoding="utf-8") as fh:
        fh.write(cfg.canonical_json() + "\n")
    manifest.add_file(cfg_path)

    ws = None
    for leg in cfg.legs:
        t0 = time.time()
        try:
            if leg == "classical":
                run_classical_leg(cfg, out, manifest)
            elif leg == "quantum":
                ws = run_quantum_leg(cfg, out, manifest, ws)
            elif leg == "perturbative":
                if not any(e <= _SPECTRAL_EPS_MAX for e in cfg.epsilon_list()):
                    manifest.notes.append(
                        "perturbative leg skipped: all epsilon values strong"
                    )
                else:
                    run_perturbative_leg(cfg, out, manifest, ws)
        except WedgeEchoError as exc:
            manifest.errors[leg] = f"{type(exc).__name__}: {exc}"
        manifest.timings[leg] = time.time() - t0
    if ws is not None:
        manifest.convergence.update(ws.convergence)

    manifest.write(os.path.join(out, "manifest.json"))
    return manifest


def reproduce_figure(figure: str, overrides: Optional[dict] = None,
                     out_dir: Optional[str] = None) -> RunManifest:
    """Run the bundled desk-scale analog scenario for one figure id."""
    from .config import load_preset

    cfg = load_preset(f"{figure}-desk")
    if overrides:
        raw = cfg.raw
        for key, val in overrides.items():
            if isinstance(val, dict) and isinstance(raw.get(key), dict):
                raw[key].update(val)
            else:
                raw[key] = val
        cfg = RunConfig(raw=raw)
    return run_scan(cfg, out_dir)
