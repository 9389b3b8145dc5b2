"""Command-line interface.

Subcommands: ``single``, ``bath``, ``sweep``, ``fit``, ``fft``.  Every
run resolves its parameters from defaults, then an optional JSON config
file (``--config``), then explicit flags, and writes a manifest next to
its outputs recording the resolved configuration, seeds and versions.
Timestamps live only in the manifest, so identical configurations
reproduce byte-identical data files.

Exit codes: 0 success, 1 usage, 2 input parse error, 3 fit failure.
"""

from __future__ import annotations

import argparse
import datetime
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, analysis, bath as bath_mod, constants, engine
from .analysis import SweepGrid, fit_revival, run_sweep, spectrum, write_spectrum_csv, write_sweep_csv
from .bath import BathConfig, NucleusCoupling, build_bath, save_bath
from .engine import bath_signal, build_tau_grid, config_hash, read_signal_csv, write_signal_csv

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_FIT = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def _env_seed() -> int:
    return int(os.environ.get("ECHOQ_SEED", "0"))


def _resolve(args: argparse.Namespace, keys: list[str]) -> dict:
    """Merge defaults, config file and explicit flags into one dict."""
    file_cfg = {}
    if args.config:
        try:
            file_cfg = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise _ParseError(f"cannot read config {args.config}: {exc}")
    resolved = {}
    for key in keys:
        val = getattr(args, key)
        if val is None and key in file_cfg:
            val = file_cfg[key]
        resolved[key] = val
    return resolved


class _ParseError(Exception):
    pass


def _write_manifest(out_base: Path, command: str, resolved: dict, outputs: list[str]) -> str:
    import scipy

    # output locations are not part of the run identity
    hashed = {k: v for k, v in resolved.items() if k not in ("out", "save_bath")}
    chash = config_hash({"command": command, **hashed})
    manifest = {
        "command": command,
        "config": resolved,
        "config_hash": chash,
        "versions": {
            "echoq": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
            "python": sys.version.split()[0],
        },
        "timestamp_utc": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        "outputs": outputs,
    }
    path = out_base.with_suffix(".manifest.json")
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")
    return chash


def _floats(text: str) -> list[float]:
    return [float(v) for v in str(text).split(",") if v != ""]


# ---------------------------------------------------------------------------
# single
# ---------------------------------------------------------------------------

def _synthetic_nucleus(omega0, omega1, cross2, p, m_dir) -> NucleusCoupling:
    if not (0.0 <= cross2 <= 1.0):
        raise _ParseError("cross2 must lie in [0, 1]")
    n0 = np.array([0.0, 0.0, 1.0])
    sin_t = np.sqrt(cross2)
    n1 = np.array([sin_t, 0.0, np.sqrt(1.0 - cross2)])
    m = n0.copy() if m_dir is None else np.asarray(_floats(m_dir))
    norm = np.linalg.norm(m)
    if norm == 0:
        raise _ParseError("m_dir must be nonzero")
    m = m / norm
    a_vec = omega1 * n1 - omega0 * n0
    return NucleusCoupling(
        position_nm=np.zeros(3), a_vec=a_vec, omega0=omega0, n0=n0,
        omega1=omega1, n1=n1, p=p, m_dir=m,
    )


def _lattice_nucleus(position, b_gauss, p, m_dir) -> NucleusCoupling:
    pos = np.asarray(_floats(position))
    if pos.shape != (3,):
        raise _ParseError("position must be x,y,z in nm")
    nv = constants.NV_AXIS_DEFAULT
    a_vec = bath_mod.hyperfine_vector(pos, nv)
    omega0_vec = constants.GAMMA_N_C13 * b_gauss * nv
    omega0 = float(np.linalg.norm(omega0_vec))
    n0 = omega0_vec / omega0
    v1 = omega0_vec + a_vec
    omega1 = float(np.linalg.norm(v1))
    m = n0.copy() if m_dir is None else np.asarray(_floats(m_dir))
    m = m / np.linalg.norm(m)
    return NucleusCoupling(
        position_nm=pos, a_vec=a_vec, omega0=omega0, n0=n0,
        omega1=omega1, n1=v1 / omega1, p=p, m_dir=m,
    )


def cmd_single(args) -> int:
    keys = ["omega0_hz", "omega1_hz", "omega1_ratio", "cross2", "position",
            "b_gauss", "p", "m_dir", "n_revivals", "points_per_cycle", "out"]
    cfg = _resolve(args, keys)
    out = Path(cfg["out"] or "single.csv")

    p = cfg["p"] if cfg["p"] is not None else 0.0
    if cfg["position"]:
        nuc = _lattice_nucleus(cfg["position"], cfg["b_gauss"] or 10.0, p, cfg["m_dir"])
    else:
        omega0 = 2 * np.pi * (cfg["omega0_hz"] if cfg["omega0_hz"] is not None else 60e3)
        if cfg["omega1_hz"] is not None:
            omega1 = 2 * np.pi * cfg["omega1_hz"]
        else:
            omega1 = omega0 * (cfg["omega1_ratio"] if cfg["omega1_ratio"] is not None else 6.0)
        cross2 = cfg["cross2"] if cfg["cross2"] is not None else 0.5
        nuc = _synthetic_nucleus(omega0, omega1, cross2, p, cfg["m_dir"])

    # one-nucleus bath reuses the product engine so output format is shared
    config = BathConfig(abundance=1.0, b_gauss=(cfg["b_gauss"] or 10.0))
    the_bath = bath_mod.BathRealization(config=config, couplings=[nuc], realization=0)
    taus = _single_grid(nuc, cfg)
    sig = bath_signal(the_bath, taus)
    chash = _write_manifest(out, "single", cfg, [str(out)])
    sig.metadata["config_hash"] = chash
    sig.metadata["seed"] = "none"
    write_signal_csv(sig, out)
    print(f"wrote {out}")
    return EXIT_OK


def _single_grid(nuc: NucleusCoupling, cfg) -> np.ndarray:
    ppc = int(cfg["points_per_cycle"] or 24)
    n_rev = float(cfg["n_revivals"] or 1.0)
    w_fast = max(nuc.omega0, nuc.omega1)
    dt = 2 * np.pi / (ppc * w_fast)
    t_l = 2 * np.pi / nuc.omega0
    tau_max = (n_rev + 0.55) * t_l
    return np.linspace(0.0, tau_max, int(np.ceil(tau_max / dt)) + 1)


# ---------------------------------------------------------------------------
# bath
# ---------------------------------------------------------------------------

def cmd_bath(args) -> int:
    keys = ["abundance", "b_gauss", "p", "r_min_nm", "r_max_nm", "seed",
            "realization", "reference", "save_bath", "n_revivals", "out"]
    cfg = _resolve(args, keys)
    out = Path(cfg["out"] or "bath.csv")
    seed = cfg["seed"] if cfg["seed"] is not None else _env_seed()
    config = BathConfig(
        abundance=cfg["abundance"] if cfg["abundance"] is not None else 0.01,
        r_min_nm=cfg["r_min_nm"] if cfg["r_min_nm"] is not None else 0.65,
        r_max_nm=cfg["r_max_nm"] if cfg["r_max_nm"] is not None else 5.5,
        b_gauss=cfg["b_gauss"] if cfg["b_gauss"] is not None else 10.0,
        seed=int(seed),
    )
    p = cfg["p"] if cfg["p"] is not None else 1.0
    realization = int(cfg["realization"] or 0)
    cfg_resolved = {**cfg, "seed": int(seed), "p": p, "realization": realization}

    outputs = [str(out)]
    ref_path = out.with_name(out.stem + "_ref" + out.suffix)
    if cfg["reference"]:
        outputs.append(str(ref_path))
    chash = _write_manifest(out, "bath", cfg_resolved, outputs)

    the_bath = build_bath(config, p=p, realization=realization)
    taus = build_tau_grid(the_bath, n_revivals=float(cfg["n_revivals"] or 1.0))
    sig = bath_signal(the_bath, taus, metadata={"config_hash": chash, "seed": int(seed)})
    write_signal_csv(sig, out)
    if cfg["save_bath"]:
        save_bath(the_bath, cfg["save_bath"])
        print(f"wrote {cfg['save_bath']}")
    if cfg["reference"]:
        ref_bath = build_bath(config, p=0.0, realization=realization)
        ref = bath_signal(ref_bath, taus, metadata={"config_hash": chash, "seed": int(seed)})
        write_signal_csv(ref, ref_path)
        print(f"wrote {ref_path}")
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------

def cmd_sweep(args) -> int:
    keys = ["b_list", "n_list", "p_list", "realizations", "seed", "workers",
            "r_min_nm", "r_max_nm", "out"]
    cfg = _resolve(args, keys)
    out = Path(cfg["out"] or "sweep.csv")
    seed = int(cfg["seed"] if cfg["seed"] is not None else _env_seed())
    grid = SweepGrid(
        b_gauss=tuple(_floats(cfg["b_list"] or "5,10,50")),
        abundance=tuple(_floats(cfg["n_list"] or "0.01")),
        p=tuple(_floats(cfg["p_list"] or "1.0")),
        realizations=int(cfg["realizations"] or 20),
        r_min_nm=cfg["r_min_nm"] if cfg["r_min_nm"] is not None else 0.65,
        r_max_nm=cfg["r_max_nm"] if cfg["r_max_nm"] is not None else 5.5,
    )
    workers = int(cfg["workers"] or 0) or (os.cpu_count() or 1)
    cfg_resolved = {**cfg, "seed": seed, "workers": workers}
    chash = _write_manifest(out, "sweep", cfg_resolved, [str(out)])

    result = run_sweep(grid, base_seed=seed, workers=workers)
    write_sweep_csv(result, out, config_hash=chash)
    extra = out.with_suffix(".cells.json")
    payload = {"config_hash": chash, **result.manifest}
    extra.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# fit / fft
# ---------------------------------------------------------------------------

def cmd_fit(args) -> int:
    keys = ["input", "revival", "force", "out"]
    cfg = _resolve(args, keys)
    if not cfg["input"]:
        raise _ParseError("fit requires --input CSV")
    try:
        sig = read_signal_csv(cfg["input"])
    except (OSError, ValueError) as exc:
        raise _ParseError(str(exc))

    if args.config and not cfg["force"]:
        file_cfg = json.loads(Path(args.config).read_text())
        want = file_cfg.get("config_hash")
        have = sig.metadata.get("config_hash")
        if want and want != have:
            raise _ParseError(
                f"config hash mismatch: input carries {have}, config expects {want} "
                "(use --force to override)"
            )

    fit = fit_revival(sig, which_revival=int(cfg["revival"] or 1))
    payload = {
        "input": str(cfg["input"]),
        "config_hash": sig.metadata.get("config_hash", "none"),
        "converged": fit.converged,
        "t_r_s": fit.t_r,
        "varpi_fit_rads": fit.varpi_fit,
        "delta_t_s": fit.delta_t,
        "c_fit": fit.c_fit,
        "residual_rms": fit.residual_rms,
        "varpi_slope_rads": fit.varpi_slope,
        "contrast_estimate": analysis.contrast_estimate(fit.varpi_fit, fit.delta_t)
        if fit.converged else None,
        "diagnostics": fit.diagnostics,
    }
    text = json.dumps(payload, indent=2, sort_keys=True, default=float) + "\n"
    if cfg["out"]:
        Path(cfg["out"]).write_text(text)
        print(f"wrote {cfg['out']}")
    else:
        print(text, end="")
    return EXIT_OK if fit.converged else EXIT_FIT


def cmd_fft(args) -> int:
    keys = ["input", "channel", "window", "out"]
    cfg = _resolve(args, keys)
    if not cfg["input"]:
        raise _ParseError("fft requires --input CSV")
    try:
        sig = read_signal_csv(cfg["input"])
        spec = spectrum(sig, channel=(cfg["channel"] or "Q"), window=(cfg["window"] or "hann"))
    except (OSError, ValueError) as exc:
        raise _ParseError(str(exc))
    out = Path(cfg["out"] or "spectrum.csv")
    write_spectrum_csv(spec, out)
    print(f"wrote {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="echoq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file; flags override its keys")
        p.add_argument("--out", help="output path")

    p = sub.add_parser("single", help="single-nucleus quadrature traces")
    common(p)
    p.add_argument("--omega0-hz", type=float, dest="omega0_hz",
                   help="bare precession frequency (Hz)")
    p.add_argument("--omega1-hz", type=float, dest="omega1_hz",
                   help="conditioned precession frequency (Hz)")
    p.add_argument("--omega1-ratio", type=float, dest="omega1_ratio",
                   help="omega1 as a multiple of omega0 (default 6)")
    p.add_argument("--cross2", type=float, help="|n0 x n1|^2 geometry factor (default 0.5)")
    p.add_argument("--position", help="lattice position x,y,z in nm (overrides omega flags)")
    p.add_argument("--b-gauss", type=float, dest="b_gauss")
    p.add_argument("--p", type=float, help="polarization degree in [-1, 1]")
    p.add_argument("--m-dir", dest="m_dir", help="polarization direction x,y,z")
    p.add_argument("--n-revivals", type=float, dest="n_revivals")
    p.add_argument("--points-per-cycle", type=int, dest="points_per_cycle")
    p.set_defaults(func=cmd_single)

    p = sub.add_parser("bath", help="full bath quadrature signal")
    common(p)
    p.add_argument("--abundance", type=float)
    p.add_argument("--b-gauss", type=float, dest="b_gauss")
    p.add_argument("--p", type=float)
    p.add_argument("--r-min-nm", type=float, dest="r_min_nm")
    p.add_argument("--r-max-nm", type=float, dest="r_max_nm")
    p.add_argument("--seed", type=int)
    p.add_argument("--realization", type=int)
    p.add_argument("--reference", action="store_const", const=True, default=None,
                   help="also write the unpolarized twin <out>_ref.csv")
    p.add_argument("--save-bath", dest="save_bath", help="also save the realization as text")
    p.add_argument("--n-revivals", type=float, dest="n_revivals")
    p.set_defaults(func=cmd_bath)

    p = sub.add_parser("sweep", help="field/abundance/polarization sweep")
    common(p)
    p.add_argument("--b-list", dest="b_list", help="comma-separated fields in gauss")
    p.add_argument("--n-list", dest="n_list", help="comma-separated abundances")
    p.add_argument("--p-list", dest="p_list", help="comma-separated polarization degrees")
    p.add_argument("--realizations", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--workers", type=int, help="default: available parallelism")
    p.add_argument("--r-min-nm", type=float, dest="r_min_nm")
    p.add_argument("--r-max-nm", type=float, dest="r_max_nm")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("fit", help="fit a revival window of a signal CSV")
    common(p)
    p.add_argument("--input", help="signal CSV produced by this tool")
    p.add_argument("--revival", type=int, help="revival index, counting from 1")
    p.add_argument("--force", action="store_const", const=True, default=None,
                   help="accept config-hash mismatches")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("fft", help="spectrum of a signal CSV channel")
    common(p)
    p.add_argument("--input", help="signal CSV produced by this tool")
    p.add_argument("--channel", choices=["I", "Q"])
    p.add_argument("--window", choices=["hann", "rectangular"])
    p.set_defaults(func=cmd_fft)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE


if __name__ == "__main__":
    sys.exit(main())
