"""Command-line front end.

Reads a JSON experiment config, runs the module pipelines, and writes
deterministic CSV data files, rendered figures, and a JSON run manifest.
Exit codes: 0 success, 1 config error, 2 tolerance breach under --strict.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__, experiments, finitegap, kernels, ode, potentials, weyl
from .canonical import kernel_via_jform
from .errors import ChristoffelLabError, ConfigError

EXPERIMENTS = ("christoffel", "universality", "clock", "martin", "kernel",
               "regularity")


def _fmt(x) -> str:
    """Full round-trip float formatting: 17 significant digits."""
    return format(float(x), ".17g")


def write_csv(path, fieldnames, rows):
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(",".join(fieldnames) + "\n")
        for row in rows:
            fh.write(",".join(
                _fmt(row[k]) if isinstance(row[k], (int, float)) else str(row[k])
                for k in fieldnames) + "\n")


def _thread_count(args) -> int:
    n = args.threads
    if n is None:
        n = int(os.environ.get("CHRISTOFFEL_LAB_THREADS", "0"))
    if n == 0:
        n = os.cpu_count() or 1
    return max(1, n)


def _ordered_map(fn, items, n_threads):
    """Map preserving input order regardless of scheduling."""
    if n_threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=n_threads) as pool:
        return list(pool.map(fn, items))


def _load_config(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(
            f"config parse error at line {exc.lineno}, column {exc.colno}: "
            f"{exc.msg}") from exc


def _resolve_set(cfg, potential):
    set_cfg = cfg.get("set")
    if set_cfg in (None, "from_floquet"):
        if isinstance(potential, potentials.Zero):
            return finitegap.FiniteGapSet(b0=0.0)
        if isinstance(potential, potentials.Constant):
            return finitegap.FiniteGapSet(b0=potential.value)
        if set_cfg == "from_floquet":
            if not isinstance(potential, potentials.Periodic):
                raise ConfigError("set: 'from_floquet' needs a periodic potential")
            window = cfg.get("grids", {}).get("floquet_window")
            n_gaps = int(cfg.get("grids", {}).get("n_gaps", 4))
            if window is None:
                raise ConfigError("set: 'from_floquet' needs grids.floquet_window")
            return weyl.floquet_bands(potential, potential.period, window, n_gaps)
        raise ConfigError("set: give {b0, gaps} or 'from_floquet'")
    return finitegap.from_config(set_cfg)


def _density_oracles(cfg, potential, set_):
    """f_mu from the Weyl ladder and the Martin density of the solved set."""
    solved = finitegap.solve_critical_points(set_) if not set_.solved else set_
    edges = [solved.b0]
    for a, b in solved.gaps:
        edges.extend((a, b))

    def f_mu(xi):
        return weyl.spectral_density(potential, float(xi), band_edges=edges).f_mu

    def f_e(xi):
        return finitegap.martin_density(solved, float(xi))

    return solved, f_mu, f_e


def run_christoffel(cfg, out_dir, n_threads, tolerances):
    potential = potentials.from_config(cfg["potential"])
    grids = cfg.get("grids", {})
    xi_grid = [float(x) for x in grids.get("xi", (0.5, 1.0, 2.0, 4.0))]
    ladder = [float(L) for L in grids.get("L", (125.0, 250.0, 500.0))]
    set_, f_mu, f_e = _density_oracles(cfg, potential, _resolve_set(cfg, potential))

    dens_rows = []
    for xi in xi_grid:
        sd = weyl.spectral_density(potential, xi,
                                   band_edges=[set_.b0] + [e for g in set_.gaps for e in g])
        dens_rows.append({"xi": xi, "f_mu": sd.f_mu,
                          "residual": sd.extrapolation_residual})
    f_mu_cache = {r["xi"]: r["f_mu"] for r in dens_rows}

    def one(pair):
        L, xi = pair
        lam = kernels.christoffel(potential, L, xi)
        ref = f_mu_cache[xi] / f_e(xi)
        val = L * lam
        return {"xi": xi, "L": L, "L_lambda": val, "reference": ref,
                "deviation": abs(val - ref)}

    pairs = [(L, xi) for L in ladder for xi in xi_grid]
    rows = _ordered_map(one, pairs, n_threads)
    write_csv(os.path.join(out_dir, "data", "christoffel.csv"),
              ["xi", "L", "L_lambda", "reference", "deviation"], rows)
    write_csv(os.path.join(out_dir, "data", "spectral_density.csv"),
              ["xi", "f_mu", "residual"], dens_rows)
    sup = experiments.sweep_sup_deviation(rows)
    summary = {"sup_deviation_per_L": {str(k): v for k, v in sorted(sup.items())},
               "final_L_sup_deviation": sup[max(sup)]}
    breach = sup[max(sup)] > tolerances["deviation_max"]
    return rows, summary, breach


def run_universality(cfg, out_dir, n_threads, tolerances):
    potential = potentials.from_config(cfg["potential"])
    grids = cfg.get("grids", {})
    xi = float(grids.get("xi", 1.0))
    ladder = [float(L) for L in grids.get("L", (500.0,))]
    halfwidth = float(grids.get("halfwidth", 2.0))
    n = int(grids.get("n", 21))
    set_, _, f_e = _density_oracles(cfg, potential, _resolve_set(cfg, potential))

    all_rows = []
    sups = {}
    last_grid = None
    for L in ladder:
        g = experiments.universality_grid(potential, L, xi, halfwidth, n, f_e)
        last_grid = g
        sups[L] = g.sup_deviation
        for i in range(n):
            for j in range(n):
                all_rows.append({
                    "xi": xi, "L": L,
                    "z": g.z_grid[i].real, "w": g.w_grid[j].real,
                    "ratio_re": g.ratio[i, j].real, "ratio_im": g.ratio[i, j].imag,
                    "sinc_re": g.sinc_ref[i, j].real, "sinc_im": g.sinc_ref[i, j].imag,
                    "abs_dev": abs(g.ratio[i, j] - g.sinc_ref[i, j])})
    write_csv(os.path.join(out_dir, "data", "universality.csv"),
              ["xi", "L", "z", "w", "ratio_re", "ratio_im", "sinc_re",
               "sinc_im", "abs_dev"], all_rows)
    summary = {"sup_deviation_per_L": {str(k): v for k, v in sorted(sups.items())}}
    breach = max(sups.values()) > tolerances["deviation_max"]
    return {"rows": all_rows, "grid": last_grid}, summary, breach


def run_clock(cfg, out_dir, n_threads, tolerances):
    potential = potentials.from_config(cfg["potential"])
    grids = cfg.get("grids", {})
    L = float(grids.get("L", 200.0))
    xi = float(grids.get("xi", 1.0))
    j_lo = int(grids.get("j_min", -3))
    j_hi = int(grids.get("j_max", 3))
    set_, _, f_e = _density_oracles(cfg, potential, _resolve_set(cfg, potential))
    import math as _math
    pad = (max(abs(j_lo), abs(j_hi)) + 4) * 2.0 * _math.pi * _math.sqrt(max(xi, 0.25)) / L
    slice_ = experiments.truncation_spectrum(potential, L, (xi - pad, xi + pad))
    rows = experiments.clock_spacing_check(potential, L, xi,
                                           range(j_lo, j_hi + 1), f_e,
                                           slice_=slice_)
    fixed = experiments.clock_spacing_check(potential, L, xi,
                                            range(j_lo, j_hi + 1), f_e,
                                            slice_=slice_, density_at="xi")
    for row, frow in zip(rows, fixed):
        row["spacing_at_xi"] = frow["spacing"]
    write_csv(os.path.join(out_dir, "data", "clock_spacing.csv"),
              ["j", "xi_left", "xi_right", "spacing", "spacing_at_xi"], rows)
    # counting-measure comparison over a wider window of the same truncation
    win_lo = float(grids.get("count_min", 0.5))
    win_hi = float(grids.get("count_max", 4.0))
    n_bins = int(grids.get("n_bins", 7))
    wide = experiments.truncation_spectrum(potential, L, (win_lo, win_hi))
    count_rows = experiments.counting_measure_compare(
        wide, lambda a, b: finitegap.martin_measure_interval(set_, a, b),
        experiments.uniform_bins(win_lo, win_hi, n_bins))
    write_csv(os.path.join(out_dir, "data", "counting_measure.csv"),
              ["bin_lo", "bin_hi", "nu_L", "rho_E", "abs_diff"], count_rows)
    worst = max(abs(r["spacing"] - 1.0) for r in rows)
    tv = sum(r["abs_diff"] for r in count_rows)
    summary = {"max_abs_spacing_minus_1": worst, "counting_total_variation": tv}
    return rows, summary, worst > tolerances["deviation_max"]


def run_martin(cfg, out_dir, n_threads, tolerances):
    potential = potentials.from_config(cfg["potential"]) if "potential" in cfg else None
    set_ = _resolve_set(cfg, potential) if potential is not None else finitegap.from_config(cfg["set"])
    solved = finitegap.solve_critical_points(set_) if not set_.solved else set_
    grids = cfg.get("grids", {})
    lo = float(grids.get("xi_min", solved.b0 - 1.0))
    hi = float(grids.get("xi_max", solved.b0 + 5.0))
    n = int(grids.get("n", 200))
    rows = []
    for xi in np.linspace(lo, hi, n):
        xi = float(xi)
        m_val = finitegap.martin_function(solved, xi)
        try:
            f_val = finitegap.martin_density(solved, xi)
        except ChristoffelLabError:
            f_val = 0.0
        rows.append({"xi": xi, "f_E": f_val, "M_E": m_val})
    write_csv(os.path.join(out_dir, "data", "martin.csv"),
              ["xi", "f_E", "M_E"], rows)
    a_val, a_res = finitegap.asymptotic_a(solved)
    residuals = [abs(finitegap.comb_map(solved, b) - finitegap.comb_map(solved, a))
                 for a, b in solved.gaps]
    summary = {"critical_points": list(solved.critical),
               "gap_residuals": residuals,
               "a_E": a_val, "a_E_fit_residual": a_res}
    breach = bool(residuals and max(residuals) > tolerances["gap_residual_max"])
    return rows, summary, breach


def run_kernel(cfg, out_dir, n_threads, tolerances):
    grids = cfg.get("grids", {})
    n_tuples = int(grids.get("n_tuples", 40))
    seed = int(grids.get("seed", 20240601))
    rng = np.random.RandomState(seed)
    pots = [potentials.Zero(), potentials.Constant(2.5),
            potentials.OscillatingExample()]

    def one(idx):
        rng_i = np.random.RandomState(seed + 7919 * idx)
        potential = pots[int(rng_i.randint(len(pots)))]
        L = float(rng_i.uniform(2.0, 20.0))
        while True:
            z = complex(rng_i.uniform(-35, 35), rng_i.uniform(-35, 35))
            w = complex(rng_i.uniform(-35, 35), rng_i.uniform(-35, 35))
            if abs(np.conj(w) - z) >= 1e-3:
                break
        kq = kernels.kernel_quadrature(potential, L, z, w).value
        kb = kernels.kernel_boundary(potential, L, z, w).value
        kj = kernel_via_jform(potential, L, z, w).value
        scale = max(abs(kq), abs(kb), abs(kj), 1e-300)
        rel = max(abs(kq - kb), abs(kb - kj), abs(kq - kj)) / scale
        return {"idx": idx, "potential": type(potential).__name__,
                "L": L, "z_re": z.real, "z_im": z.imag,
                "w_re": w.real, "w_im": w.imag,
                "k_re": kb.real, "k_im": kb.imag, "rel_disagreement": rel}

    rows = _ordered_map(one, list(range(n_tuples)), n_threads)
    write_csv(os.path.join(out_dir, "data", "kernel_methods.csv"),
              ["idx", "potential", "L", "z_re", "z_im", "w_re", "w_im",
               "k_re", "k_im", "rel_disagreement"], rows)
    worst = max(r["rel_disagreement"] for r in rows)
    summary = {"max_rel_disagreement": worst, "n_tuples": n_tuples, "seed": seed}
    return rows, summary, worst > tolerances["kernel_agreement"]


def run_regularity(cfg, out_dir, n_threads, tolerances):
    potential = potentials.from_config(cfg["potential"])
    grids = cfg.get("grids", {})
    ladder = [float(L) for L in grids.get("L", (100.0, 300.0, 1000.0))]
    xi = float(grids.get("xi", 2.0))
    x_lo = float(grids.get("x_min", 100.0))
    x_hi = float(grids.get("x_max", 200.0))
    n_x = int(grids.get("n_x", 21))
    mean_rows = [{"L": L, "cesaro_mean": potentials.cesaro_mean(potential, L)}
                 for L in ladder]
    xs = np.linspace(x_lo, x_hi, n_x)
    rates = ode.growth_rate(potential, complex(xi, 0.0), xs)
    growth_rows = [{"x": float(x), "rate": float(r)} for x, r in zip(xs, rates)]
    write_csv(os.path.join(out_dir, "data", "cesaro_means.csv"),
              ["L", "cesaro_mean"], mean_rows)
    write_csv(os.path.join(out_dir, "data", "growth_rate.csv"),
              ["x", "rate"], growth_rows)
    summary = {"final_cesaro_mean": mean_rows[-1]["cesaro_mean"],
               "local_l1_sup": potentials.local_l1_sup(potential, max(ladder)),
               "max_growth_rate": max(r["rate"] for r in growth_rows)}
    breach = (abs(summary["final_cesaro_mean"]) > tolerances["cesaro_mean_max"]
              or summary["max_growth_rate"] > tolerances["growth_rate_max"])
    return (mean_rows, growth_rows), summary, breach


DEFAULT_TOLERANCES = {
    "deviation_max": 0.05,
    "gap_residual_max": 1e-10,
    "kernel_agreement": 1e-8,
    "cesaro_mean_max": 0.02,
    "growth_rate_max": 0.05,
}


def _render_figures(experiment, payload, cfg, fig_dir):
    from . import plotting
    if experiment == "christoffel":
        plotting.render_christoffel(payload, fig_dir)
    elif experiment == "universality":
        if payload["grid"] is not None:
            plotting.render_universality(payload["grid"], fig_dir)
    elif experiment == "clock":
        plotting.render_clock(payload, fig_dir)
    elif experiment == "martin":
        plotting.render_martin(payload, fig_dir)
    elif experiment == "kernel":
        plotting.render_kernel(payload, fig_dir)
    elif experiment == "regularity":
        plotting.render_regularity(payload[0], payload[1], fig_dir)


def run(config: dict, out_dir: str, experiment: str | None = None,
        strict: bool = False, n_threads: int = 1, figures: bool = True) -> int:
    """Run one experiment; returns the process exit status."""
    experiment = experiment or config.get("experiment")
    if experiment not in EXPERIMENTS:
        raise ConfigError(f"experiment must be one of {EXPERIMENTS}, "
                          f"got {experiment!r}")
    tolerances = dict(DEFAULT_TOLERANCES)
    for key, val in config.get("tolerances", {}).items():
        if key not in tolerances:
            raise ConfigError(f"unknown tolerance {key!r}")
        if float(val) <= 0:
            raise ConfigError(f"tolerance {key!r} must be positive")
        tolerances[key] = float(val)
    for key, val in config.get("grids", {}).items():
        if isinstance(val, (list, tuple)) and len(val) == 0:
            raise ConfigError(f"grid {key!r} must be nonempty")
    os.makedirs(os.path.join(out_dir, "data"), exist_ok=True)
    runner = {"christoffel": run_christoffel, "universality": run_universality,
              "clock": run_clock, "martin": run_martin, "kernel": run_kernel,
              "regularity": run_regularity}[experiment]
    t0 = time.perf_counter()
    payload, summary, breach = runner(config, out_dir, n_threads, tolerances)
    wall = time.perf_counter() - t0
    if figures:
        fig_dir = os.path.join(out_dir, "figures")
        os.makedirs(fig_dir, exist_ok=True)
        _render_figures(experiment, payload, config, fig_dir)
    import scipy

    manifest = {
        "experiment": experiment,
        "config": config,
        "tolerances_used": tolerances,
        "versions": {"christoffel_lab": __version__,
                     "python": sys.version.split()[0],
                     "numpy": np.__version__, "scipy": scipy.__version__},
        "threads": n_threads,
        "wall_time_s": wall,
        "summary": summary,
        "strict": strict,
        "breach": bool(breach),
    }
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    if strict and breach:
        return 2
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="christoffel-lab",
        description="Christoffel function, kernel, Martin and spectral "
                    "experiments for half-line Schrodinger operators")
    parser.add_argument("--config", required=True, help="JSON config path")
    parser.add_argument("--experiment", choices=EXPERIMENTS,
                        help="override the experiment named in the config")
    parser.add_argument("--out", help="output directory (default from config)")
    parser.add_argument("--strict", action="store_true",
                        help="exit 2 when a summary tolerance is breached")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads; 0 = auto "
                             "(CHRISTOFFEL_LAB_THREADS as fallback)")
    parser.add_argument("--no-figures", action="store_true",
                        help="skip figure rendering")
    args = parser.parse_args(argv)
    try:
        config = _load_config(args.config)
        out_dir = args.out or config.get("output")
        if not out_dir:
            raise ConfigError("no output directory: give --out or config 'output'")
        return run(config, out_dir, experiment=args.experiment,
                   strict=args.strict, n_threads=_thread_count(args),
                   figures=not args.no_figures)
    except ChristoffelLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
