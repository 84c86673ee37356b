"""File formats: dataset CSV, chain draw storage, truth records and run
manifests.  All floats are written with repr-faithful precision so that
identical runs produce byte-identical files."""

from __future__ import annotations

import hashlib
import json
import os
import time
from pathlib import Path

import numpy as np
import pandas as pd

from .errors import ValidationError
from .model import ChainOutput, Dataset
from .simulate import TruthRecord

FLOAT_FORMAT = "%.17g"


def resolve_out(path, default_root_env: str = "DYNCONN_OUTPUT_ROOT") -> Path:
    """Resolve an output directory against the env-var root, if set."""
    p = Path(path)
    root = os.environ.get(default_root_env)
    if root and not p.is_absolute():
        p = Path(root) / p
    return p


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# dataset


def write_dataset_csv(data: Dataset, path) -> None:
    cols = {"t": np.arange(1, data.T + 1)}
    for i in range(data.R):
        cols[f"y{i + 1}"] = data.y[i]
    cols["x"] = data.x
    pd.DataFrame(cols).to_csv(path, index=False, float_format=FLOAT_FORMAT)


def read_dataset_csv(path, x=None) -> Dataset:
    """Read `t,y1,...,yR[,x]`; a missing x column must be supplied."""
    df = pd.read_csv(path, float_precision="round_trip")
    ycols = sorted(
        (c for c in df.columns if c.startswith("y") and c[1:].isdigit()),
        key=lambda c: int(c[1:]),
    )
    if not ycols:
        raise ValidationError(f"no y columns found in {path}")
    y = df[ycols].to_numpy().T
    if "x" in df.columns:
        x = df["x"].to_numpy()
    elif x is None:
        raise ValidationError("dataset file has no x column and no regressor was supplied")
    return Dataset(y=y, x=np.asarray(x, dtype=float))


# ---------------------------------------------------------------------------
# truth record


def write_truth_json(truth: TruthRecord, path) -> None:
    with open(path, "w") as fh:
        json.dump(truth.to_dict(), fh)


def read_truth_json(path) -> TruthRecord:
    with open(path) as fh:
        return TruthRecord.from_dict(json.load(fh))


# ---------------------------------------------------------------------------
# chain output: one CSV per block plus run.json


def write_chain(chain: ChainOutput, outdir) -> None:
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    n, R, T = chain.n_draws, chain.R, chain.T
    iters = np.arange(1, n + 1)

    alpha = pd.DataFrame(
        {
            "iter": np.repeat(iters, R),
            "i": np.tile(np.arange(1, R + 1), n),
            "value": chain.alpha.ravel(),
        }
    )
    alpha.to_csv(outdir / "alpha.csv", index=False, float_format=FLOAT_FORMAT)

    beta = pd.DataFrame(
        {
            "iter": np.repeat(iters, R * T),
            "i": np.tile(np.repeat(np.arange(1, R + 1), T), n),
            "t": np.tile(np.arange(1, T + 1), n * R),
            "value": chain.beta.ravel(),
        }
    )
    beta.to_csv(outdir / "beta.csv", index=False, float_format=FLOAT_FORMAT)

    gamma = pd.DataFrame(
        {
            "iter": np.repeat(iters, R * R * T),
            "i": np.tile(np.repeat(np.arange(1, R + 1), R * T), n),
            "j": np.tile(np.repeat(np.arange(1, R + 1), T), n * R),
            "t": np.tile(np.arange(1, T + 1), n * R * R),
            "value": chain.gamma.ravel(),
        }
    )
    gamma.to_csv(outdir / "gamma.csv", index=False, float_format=FLOAT_FORMAT)

    scalars = pd.DataFrame({"iter": iters, **chain.scalars})
    scalars.to_csv(outdir / "scalars.csv", index=False, float_format=FLOAT_FORMAT)

    with open(outdir / "run.json", "w") as fh:
        json.dump(chain.metadata, fh, indent=2, sort_keys=True)


def read_chain(outdir) -> ChainOutput:
    outdir = Path(outdir)
    scalars_df = pd.read_csv(outdir / "scalars.csv", float_precision="round_trip").sort_values(
        "iter"
    )
    n = len(scalars_df)
    scalars = {c: scalars_df[c].to_numpy() for c in scalars_df.columns if c != "iter"}

    alpha_df = pd.read_csv(outdir / "alpha.csv", float_precision="round_trip").sort_values(["iter", "i"])
    R = alpha_df["i"].max()
    alpha = alpha_df["value"].to_numpy().reshape(n, R)

    beta_df = pd.read_csv(outdir / "beta.csv", float_precision="round_trip").sort_values(["iter", "i", "t"])
    T = beta_df["t"].max()
    beta = beta_df["value"].to_numpy().reshape(n, R, T)

    gamma_df = pd.read_csv(outdir / "gamma.csv", float_precision="round_trip").sort_values(["iter", "i", "j", "t"])
    gamma = gamma_df["value"].to_numpy().reshape(n, R, R, T)

    with open(outdir / "run.json") as fh:
        metadata = json.load(fh)
    return ChainOutput(alpha=alpha, beta=beta, gamma=gamma, scalars=scalars, metadata=metadata)


# ---------------------------------------------------------------------------
# run manifest


def write_manifest(
    outdir,
    command: str,
    config: dict,
    inputs: dict,
    outputs: list,
    seed=None,
    started: float = None,
) -> None:
    """manifest.json names every input by content hash so identical
    manifests imply byte-identical reruns."""
    outdir = Path(outdir)
    manifest = {
        "command": command,
        "config": config,
        "seed": seed,
        "inputs": {name: {"path": str(p), "sha256": sha256_file(p)} for name, p in inputs.items()},
        "outputs": sorted(str(o) for o in outputs),
        "version": _package_version(),
        "wall_clock_seconds": None if started is None else time.perf_counter() - started,
    }
    with open(outdir / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)


def _package_version() -> str:
    try:
        from importlib.metadata import version

        return version("dynconn")
    except Exception:
        return "unknown"
