"""Command-line entry point wiring simulation, fitting and reporting into
reproducible runs.

Exit codes: 0 success, 2 validation error, 3 numeric degeneracy, 4 I/O.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import json
import sys
import time
from pathlib import Path

import numpy as np
import pandas as pd

from . import diagnostics, io, signal, simulate
from .errors import NumericDegeneracyError, ValidationError
from .model import Hyperparameters, ModelSpec, ml2_hyperparameters
from .sampler import ChainControls, run_chain


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dynconn",
        description="Dynamic effective-connectivity models: simulate, fit, report.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="generate a synthetic dataset with ground truth")
    p.add_argument("--variant", choices=simulate.VARIANTS, default="rwprime")
    p.add_argument("--T", type=int, default=285)
    p.add_argument("--R", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--phi", type=float, default=0.999)
    p.add_argument("--rho", type=float, default=0.5)
    p.add_argument("--tau", type=float, default=0.8)
    p.add_argument("--sigma2-eps", type=float, default=0.01)
    p.add_argument("--sigma2-omega", type=float, default=0.01)
    p.add_argument("--sigma2-delta", type=float, default=0.01)
    p.add_argument("--mask", default="", help="zeroed pairs, e.g. '3,1;3,2'")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    # fit flags default to None so precedence is CLI flag > config file > default
    p = sub.add_parser("fit", help="run the Gibbs sampler on a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--model", choices=("rw", "ar", "dp"))
    p.add_argument("--mask", help="zeroed pairs, e.g. '3,3'")
    p.add_argument("--c", type=float)
    p.add_argument("--burn", type=int)
    p.add_argument("--keep", type=int)
    p.add_argument("--thin", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--prop-scale-sigma", type=float)
    p.add_argument("--prop-scale-rho", type=float)
    p.add_argument("--chains", type=int)
    p.add_argument("--config", help="JSON config file; CLI flags take precedence")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("report", help="posterior diagnostics for stored chains")
    p.add_argument("--chain", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--truth", help="truth.json for coverage scoring (optional)")
    p.add_argument("--compare", nargs="*", default=[], help="additional chain dirs")
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--plugin-beta", action="store_true", help="condition on stored beta draws")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("hrf", help="emit the sampled HRF and modeled regressor as CSV")
    p.add_argument("--design", help="stimulus design JSON (onsets/durations)")
    p.add_argument("--blocks", type=int, default=6)
    p.add_argument("--trials-per-block", type=int, default=18)
    p.add_argument("--trial-duration", type=float, default=2.0)
    p.add_argument("--delta", type=float, default=2.0)
    p.add_argument("--T", type=int, default=285)
    p.add_argument("--a1", type=float, default=signal.DEFAULT_A1)
    p.add_argument("--a2", type=float, default=signal.DEFAULT_A2)
    p.add_argument("--b1", type=float, default=signal.DEFAULT_B1)
    p.add_argument("--b2", type=float, default=signal.DEFAULT_B2)
    p.add_argument("--c", type=float, default=signal.DEFAULT_C)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_hrf)

    p = sub.add_parser("smooth-bold", help="sinusoid smoother for the regressor column")
    p.add_argument("--data", required=True, help="dataset CSV with an x column")
    p.add_argument("--grid-step", type=float, default=None, help="frequency grid step")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_smooth_bold)
    return parser


def _outdir(args) -> Path:
    # parent must exist: a missing output root is an I/O error, not silently created
    out = io.resolve_out(args.out)
    out.mkdir(parents=False, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    started = time.perf_counter()
    out = _outdir(args)
    params = simulate.SimulationParams(
        sigma2_eps=args.sigma2_eps,
        sigma2_omega=args.sigma2_omega,
        sigma2_delta=args.sigma2_delta,
        phi=args.phi,
        rho=args.rho,
        tau=args.tau,
        zero_mask=ModelSpec.parse_mask(args.mask),
    )
    rng = np.random.default_rng(args.seed)
    data, truth = simulate.simulate_dataset(args.variant, args.T, args.R, rng, params=params)
    io.write_dataset_csv(data, out / "data.csv")
    io.write_truth_json(truth, out / "truth.json")
    io.write_manifest(
        out,
        command="simulate",
        config={k: v for k, v in vars(args).items() if k not in ("func", "command")},
        inputs={},
        outputs=["data.csv", "truth.json"],
        seed=args.seed,
        started=started,
    )
    return 0


def _fit_one(data, spec, hyper, controls, outdir):
    chain = run_chain(data, spec, hyper, controls)
    io.write_chain(chain, outdir)
    return chain


def cmd_fit(args) -> int:
    started = time.perf_counter()
    out = _outdir(args)
    config = {}
    if args.config:
        with open(args.config) as fh:
            config = json.load(fh)

    defaults = {
        "model": "dp",
        "mask": "",
        "c": 0.1,
        "burn": 10_000,
        "keep": 20_000,
        "thin": 1,
        "seed": 0,
        "prop_scale_sigma": 0.1,
        "prop_scale_rho": 0.1,
        "chains": 1,
    }

    def eff(name):
        cli_val = getattr(args, name, None)
        if cli_val is not None:
            return cli_val
        return config.get(name, defaults[name])

    data = io.read_dataset_csv(args.data)
    spec = ModelSpec(variant=eff("model"), zero_mask=ModelSpec.parse_mask(eff("mask")))
    hyper_overrides = config.get("hyperparameters", {})
    hyper = ml2_hyperparameters(data, spec, c=float(eff("c")), overrides=hyper_overrides)
    base_controls = dict(
        burn=int(eff("burn")),
        keep=int(eff("keep")),
        thin=int(eff("thin")),
        prop_scale_sigma=float(eff("prop_scale_sigma")),
        prop_scale_rho=float(eff("prop_scale_rho")),
    )
    seed = int(eff("seed"))
    chains = int(eff("chains"))

    outputs = []
    if chains == 1:
        _fit_one(data, spec, hyper, ChainControls(seed=seed, **base_controls), out)
        outputs = ["alpha.csv", "beta.csv", "gamma.csv", "scalars.csv", "run.json"]
    else:
        with concurrent.futures.ThreadPoolExecutor(max_workers=chains) as pool:
            futures = []
            for k in range(chains):
                sub = out / f"chain{k}"
                futures.append(
                    pool.submit(
                        _fit_one, data, spec, hyper,
                        ChainControls(seed=seed + k, **base_controls), sub,
                    )
                )
                outputs.append(f"chain{k}/")
            for f in futures:
                f.result()

    io.write_manifest(
        out,
        command="fit",
        config={
            "model": spec.variant,
            "mask": sorted(spec.zero_mask),
            "c": float(eff("c")),
            "chains": chains,
            "hyperparameters": hyper.to_dict(),
            **base_controls,
        },
        inputs={"data": args.data},
        outputs=outputs,
        seed=seed,
        started=started,
    )
    return 0


def _predictive_frame(chain, data, hyper, level, seed, resimulate_beta, label):
    rng = np.random.default_rng(seed)
    cov, length = diagnostics.posterior_predictive(
        chain, data, hyper, rng, level=level, resimulate_beta=resimulate_beta
    )
    return pd.DataFrame(
        {
            "chain": label,
            "region": np.arange(1, chain.R + 1),
            "coverage": cov,
            "mean_length": length,
        }
    )


def cmd_report(args) -> int:
    started = time.perf_counter()
    out = _outdir(args)
    data = io.read_dataset_csv(args.data)
    chain_dirs = [Path(args.chain)] + [Path(c) for c in args.compare]
    chains = [io.read_chain(d) for d in chain_dirs]
    outputs = []

    frames = []
    for d, chain in zip(chain_dirs, chains):
        hyper = Hyperparameters.from_dict(chain.metadata["hyperparameters"])
        frames.append(
            _predictive_frame(
                chain, data, hyper, args.level, args.seed, not args.plugin_beta, d.name
            )
        )
    pd.concat(frames, ignore_index=True).to_csv(
        out / "predictive.csv", index=False, float_format=io.FLOAT_FORMAT
    )
    outputs.append("predictive.csv")

    chain = chains[0]
    if args.truth:
        truth = io.read_truth_json(args.truth)
        cov = diagnostics.truth_coverage(chain, truth, level=args.level)
        rows = [
            {"i": i + 1, "j": j + 1, "coverage": cov[i, j]}
            for i in range(chain.R)
            for j in range(chain.R)
        ]
        pd.DataFrame(rows).to_csv(out / "coverage.csv", index=False, float_format=io.FLOAT_FORMAT)
        outputs.append("coverage.csv")

    support = diagnostics.positive_support_map(chain)
    R, _, T = support.shape
    i_idx, j_idx, t_idx = np.meshgrid(
        np.arange(1, R + 1), np.arange(1, R + 1), np.arange(1, T + 1), indexing="ij"
    )
    masked = np.array(
        [[1 if (i + 1, j + 1) in _mask_of(chain) else 0 for j in range(R)] for i in range(R)]
    )
    pd.DataFrame(
        {
            "i": i_idx.ravel(),
            "j": j_idx.ravel(),
            "t": t_idx.ravel(),
            "prop": support.ravel(),
            "masked": np.repeat(masked.ravel(), T),
        }
    ).to_csv(out / "support_map.csv", index=False, float_format=io.FLOAT_FORMAT)
    outputs.append("support_map.csv")

    smooth = signal.fit_sinusoid(data.x)
    corr = diagnostics.connectivity_bold_correlation(chain, smooth)
    rows = [
        {"i": i + 1, "j": j + 1, "correlation": corr[i, j]}
        for i in range(chain.R)
        for j in range(chain.R)
    ]
    pd.DataFrame(rows).to_csv(out / "correlations.csv", index=False, float_format=io.FLOAT_FORMAT)
    outputs.append("correlations.csv")

    plotdir = out / "plotdata"
    plotdir.mkdir(exist_ok=True)
    bands = diagnostics.quantile_bands(chain)
    probs = np.arange(0.0, 1.0001, 0.125)
    for qi, prob in enumerate(probs):
        pd.DataFrame(
            {
                "i": i_idx.ravel(),
                "j": j_idx.ravel(),
                "t": t_idx.ravel(),
                "value": bands[qi].ravel(),
            }
        ).to_csv(
            plotdir / f"gamma_q{prob:.3f}.csv", index=False, float_format=io.FLOAT_FORMAT
        )
    outputs.append("plotdata/")

    with open(out / "geweke.json", "w") as fh:
        json.dump(diagnostics.geweke_zscores(chain), fh, indent=2, sort_keys=True)
    outputs.append("geweke.json")

    inputs = {"data": args.data, "chain_run": chain_dirs[0] / "run.json"}
    if args.truth:
        inputs["truth"] = args.truth
    io.write_manifest(
        out,
        command="report",
        config={k: v for k, v in vars(args).items() if k not in ("func", "command")},
        inputs=inputs,
        outputs=outputs,
        seed=args.seed,
        started=started,
    )
    return 0


def _mask_of(chain) -> set:
    return {tuple(p) for p in chain.metadata.get("zero_mask", [])}


def cmd_hrf(args) -> int:
    started = time.perf_counter()
    out = _outdir(args)
    params = signal.HRFParams(a1=args.a1, a2=args.a2, b1=args.b1, b2=args.b2, c=args.c)
    if args.design:
        design = signal.StimulusDesign.from_json(args.design)
    else:
        design = signal.block_design(
            args.blocks, args.trials_per_block, args.trial_duration, args.delta, args.T
        )
    tgrid = np.arange(design.T) * design.delta
    pd.DataFrame({"t": tgrid, "value": signal.glover_hrf(params, tgrid)}).to_csv(
        out / "hrf.csv", index=False, float_format=io.FLOAT_FORMAT
    )
    pd.DataFrame({"t": tgrid, "value": signal.convolve_stimulus(design, params)}).to_csv(
        out / "x.csv", index=False, float_format=io.FLOAT_FORMAT
    )
    inputs = {"design": args.design} if args.design else {}
    io.write_manifest(
        out,
        command="hrf",
        config={k: v for k, v in vars(args).items() if k not in ("func", "command")},
        inputs=inputs,
        outputs=["hrf.csv", "x.csv"],
        started=started,
    )
    return 0


def cmd_smooth_bold(args) -> int:
    started = time.perf_counter()
    out = _outdir(args)
    data = io.read_dataset_csv(args.data)
    grid = None
    if args.grid_step:
        grid = np.arange(args.grid_step, 0.5, args.grid_step)
    fit = signal.fit_sinusoid(data.x, frequency_grid=grid)
    with open(out / "sinusoid.json", "w") as fh:
        json.dump(
            {
                "omega_hat": fit.omega_hat,
                "beta1": fit.beta1,
                "beta2": fit.beta2,
                "amplitude": fit.amplitude,
                "phase": fit.phase,
                "residual_variance": fit.residual_variance,
            },
            fh,
            indent=2,
            sort_keys=True,
        )
    t = np.arange(1, data.T + 1)
    pd.DataFrame({"t": t, "value": fit.evaluate(t)}).to_csv(
        out / "xhat.csv", index=False, float_format=io.FLOAT_FORMAT
    )
    io.write_manifest(
        out,
        command="smooth-bold",
        config={k: v for k, v in vars(args).items() if k not in ("func", "command")},
        inputs={"data": args.data},
        outputs=["sinusoid.json", "xhat.csv"],
        started=started,
    )
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericDegeneracyError as exc:
        print(f"numeric degeneracy: {exc}", file=sys.stderr)
        return 3
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    sys.exit(main())
