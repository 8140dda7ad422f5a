"""Command-line front end: design -> simulate -> report pipeline.

Subcommands
-----------
design <config>                 synthesize the canceler, write controller.txt
simulate <config> <controller>  closed-loop run, write trace.csv / symbols.csv
pulse <config>                  dump the basis pulse taps to pulse.csv
norm <config> <controller>      re-verify the certified closed-loop norm

Configs are TOML with [relay], [ofdm] and [synthesis] sections plus a
top-level output_dir.  Controller artifacts are plain-text matrix dumps
stamped with a hash of the design-relevant config values; simulate and
norm refuse artifacts whose stamp does not match their config.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .hinf import Controller, close_loop, gamma_iterate, hinf_norm
from .plant import PlantError, RelayParams, build_generalized_plant
from .pulse import generate_ofdm_bpsk, gram_offdiagonal, srrc_taps
from .sim import error_metrics, simulate
from .sysmat import DiscreteStateSpace, first_order_lowpass

ARTIFACT_HEADER = "sicancel controller v1"


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class OfdmSettings:
    num_blocks: int
    block_len: int
    guard_len: int
    seed: int


@dataclass(frozen=True)
class SynthesisSettings:
    rel_tol: float
    epsilon: float


@dataclass(frozen=True)
class RunConfig:
    params: RelayParams
    filter_tau: float
    ofdm: OfdmSettings
    synthesis: SynthesisSettings
    output_dir: Path
    design_hash: str


_SCHEMA = {
    "relay": {
        "a": float,
        "f": float,
        "h": float,
        "N": int,
        "m": int,
        "N_p": int,
        "beta": float,
        "paths": list,
        "filter_tau": float,
    },
    "ofdm": {
        "num_blocks": int,
        "block_len": int,
        "guard_len": int,
        "seed": int,
    },
    "synthesis": {
        "rel_tol": float,
        "epsilon": float,
    },
}
_TOP_LEVEL = {"output_dir": str}


def _coerce(section: str, key: str, want, value):
    where = f"{section}.{key}" if section else key
    if want is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{where}: expected a number, got {value!r}")
        return float(value)
    if want is int:
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{where}: expected an integer, got {value!r}")
        return int(value)
    if want is str:
        if not isinstance(value, str):
            raise ConfigError(f"{where}: expected a string, got {value!r}")
        return value
    if want is list:
        if not isinstance(value, list):
            raise ConfigError(f"{where}: expected a list, got {value!r}")
        return value
    raise AssertionError(want)


def _parse_paths(raw) -> tuple:
    out = []
    for i, item in enumerate(raw):
        if (
            not isinstance(item, list)
            or len(item) != 2
            or isinstance(item[0], bool)
            or isinstance(item[1], bool)
            or not isinstance(item[0], (int, float))
            or not isinstance(item[1], int)
        ):
            raise ConfigError(
                f"relay.paths[{i}]: expected [gain, integer_delay], got {item!r}"
            )
        out.append((float(item[0]), int(item[1])))
    if not out:
        raise ConfigError("relay.paths: at least one path is required")
    return tuple(out)


def parse_config(path) -> RunConfig:
    """Load and fully validate a run configuration.

    Unknown keys are rejected with their location; missing keys are all
    reported at once; relay invariants are re-validated here so a bad file
    fails before any numerics start.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as e:
        raise ConfigError(f"{path}: invalid TOML: {e}") from e

    missing = []
    values: dict = {}
    for key, want in _TOP_LEVEL.items():
        if key in data:
            values[key] = _coerce("", key, want, data.pop(key))
        else:
            missing.append(key)
    for section, keys in _SCHEMA.items():
        body = data.pop(section, None)
        if body is None:
            missing.extend(f"{section}.{k}" for k in keys)
            continue
        if not isinstance(body, dict):
            raise ConfigError(f"{section}: expected a section")
        for key, want in keys.items():
            if key in body:
                values[f"{section}.{key}"] = _coerce(
                    section, key, want, body.pop(key)
                )
            else:
                missing.append(f"{section}.{key}")
        if body:
            raise ConfigError(
                f"unknown key {section}.{sorted(body)[0]} in {path}"
            )
    if data:
        raise ConfigError(f"unknown key {sorted(data)[0]} in {path}")
    if missing:
        raise ConfigError(f"missing required keys: {', '.join(sorted(missing))}")

    paths = _parse_paths(values["relay.paths"])
    tau = values["relay.filter_tau"]
    if tau <= 0:
        raise ConfigError("relay.filter_tau: must be positive")
    try:
        params = RelayParams(
            a=values["relay.a"],
            paths=paths,
            f=values["relay.f"],
            h=values["relay.h"],
            N=values["relay.N"],
            m=values["relay.m"],
            N_p=values["relay.N_p"],
            beta=values["relay.beta"],
            aa_filter=first_order_lowpass(tau, 2),
        )
    except PlantError as e:
        raise ConfigError(f"relay: {e}") from e

    ofdm = OfdmSettings(
        num_blocks=values["ofdm.num_blocks"],
        block_len=values["ofdm.block_len"],
        guard_len=values["ofdm.guard_len"],
        seed=values["ofdm.seed"],
    )
    if ofdm.num_blocks < 1:
        raise ConfigError("ofdm.num_blocks: must be >= 1")
    if ofdm.block_len < 2 or ofdm.block_len & (ofdm.block_len - 1) != 0:
        raise ConfigError("ofdm.block_len: must be a power of two >= 2")
    if not 0 <= ofdm.guard_len < ofdm.block_len:
        raise ConfigError("ofdm.guard_len: must be in [0, block_len)")
    if ofdm.seed < 0:
        raise ConfigError("ofdm.seed: must be nonnegative")

    synth = SynthesisSettings(
        rel_tol=values["synthesis.rel_tol"],
        epsilon=values["synthesis.epsilon"],
    )
    if not 0 < synth.rel_tol < 1:
        raise ConfigError("synthesis.rel_tol: must be in (0, 1)")
    if synth.epsilon <= 0:
        raise ConfigError("synthesis.epsilon: must be positive")

    digest = _design_hash(params, tau, synth)
    return RunConfig(
        params=params,
        filter_tau=tau,
        ofdm=ofdm,
        synthesis=synth,
        output_dir=Path(values["output_dir"]),
        design_hash=digest,
    )


def _design_hash(params: RelayParams, tau: float, synth: SynthesisSettings) -> str:
    # only values that determine the controller participate
    parts = [
        f"a={params.a!r}",
        f"paths={params.paths!r}",
        f"f={params.f!r}",
        f"h={params.h!r}",
        f"N={params.N!r}",
        f"m={params.m!r}",
        f"N_p={params.N_p!r}",
        f"beta={params.beta!r}",
        f"filter_tau={tau!r}",
        f"rel_tol={synth.rel_tol!r}",
        f"epsilon={synth.epsilon!r}",
    ]
    return hashlib.sha256(";".join(parts).encode()).hexdigest()[:16]


def _fmt_row(row) -> str:
    return " ".join(repr(float(v)) for v in row)


def save_controller(path, ctrl: Controller, design_hash: str, block_ratio: int):
    g = ctrl.system
    lines = [
        ARTIFACT_HEADER,
        f"config_hash = {design_hash}",
        f"gamma = {ctrl.gamma_certified!r}",
        f"period = {g.period!r}",
        f"block_ratio = {block_ratio}",
        f"states = {g.n_states}",
        f"inputs = {g.n_inputs}",
        f"outputs = {g.n_outputs}",
    ]
    for name, M in (("A", g.A), ("B", g.B), ("C", g.C), ("D", g.D)):
        lines.append(name)
        lines.extend(_fmt_row(row) for row in M)
    Path(path).write_text("\n".join(lines) + "\n")


def load_controller(path):
    """Read an artifact back; returns (Controller, config_hash, block_ratio)."""
    text = Path(path).read_text().strip().splitlines()
    if not text or text[0] != ARTIFACT_HEADER:
        raise ConfigError(f"{path}: not a controller artifact")
    fields = {}
    i = 1
    while i < len(text) and "=" in text[i]:
        key, _, val = text[i].partition("=")
        fields[key.strip()] = val.strip()
        i += 1
    try:
        gamma = float(fields["gamma"])
        period = float(fields["period"])
        block_ratio = int(fields["block_ratio"])
        n = int(fields["states"])
        p = int(fields["inputs"])
        q = int(fields["outputs"])
        cfg_hash = fields["config_hash"]
    except KeyError as e:
        raise ConfigError(f"{path}: missing artifact field {e}") from e
    mats = {}
    name = None
    rows: list = []
    for line in text[i:]:
        if line in ("A", "B", "C", "D"):
            if name is not None:
                mats[name] = rows
            name, rows = line, []
        else:
            rows.append([float(v) for v in line.split()])
    if name is not None:
        mats[name] = rows
    shapes = {"A": (n, n), "B": (n, p), "C": (q, n), "D": (q, p)}
    out = {}
    for key, shape in shapes.items():
        M = np.array(mats.get(key, []), dtype=np.float64).reshape(shape)
        out[key] = M
    g = DiscreteStateSpace(out["A"], out["B"], out["C"], out["D"], period)
    return Controller(g, gamma_certified=gamma), cfg_hash, block_ratio


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _out_dir(cfg: RunConfig, override) -> Path:
    out = Path(override) if override else cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_design(cfg: RunConfig, out_override=None) -> int:
    out = _out_dir(cfg, out_override)
    pulse = srrc_taps(cfg.params.beta, cfg.params.N, cfg.params.N_p, cfg.params.h)
    plant = build_generalized_plant(cfg.params, pulse)
    gamma, ctrl = gamma_iterate(
        plant, rel_tol=cfg.synthesis.rel_tol, epsilon=cfg.synthesis.epsilon
    )
    cl = close_loop(plant, ctrl)
    rho = cl.spectral_radius()
    # accurate to a small fraction of the certification slack gamma*1e-4
    norm = hinf_norm(cl, tol=max(1e-12, 2e-5 * gamma))
    target = out / "controller.txt"
    save_controller(target, ctrl, cfg.design_hash, cfg.params.N)
    g = ctrl.system
    print(f"plant: states={plant.sigma.n_states} inputs=w:2+u:2 "
          f"outputs=z:2+y:{plant.n_y}")
    print(f"perf_shift = {plant.perf_shift}")
    print(f"gamma_opt = {gamma!r}")
    print(f"controller: states={g.n_states} inputs={g.n_inputs} "
          f"outputs={g.n_outputs}")
    print(f"dare_residuals: x={ctrl.info.get('x_residual', 0.0):.3e} "
          f"y={ctrl.info.get('y_residual', 0.0):.3e}")
    print(f"closed_loop: spectral_radius={rho:.6f} verified_norm={norm!r}")
    print(f"stable: {'true' if rho < 1 else 'false'}")
    print(f"artifact: {target}")
    return 0


def cmd_simulate(
    cfg: RunConfig,
    controller_path,
    out_override=None,
    seed=None,
    zero_input=False,
) -> int:
    out = _out_dir(cfg, out_override)
    ctrl, cfg_hash, _ = load_controller(controller_path)
    if cfg_hash != cfg.design_hash:
        raise ConfigError(
            f"controller artifact was designed for config hash {cfg_hash}, "
            f"this config hashes to {cfg.design_hash}"
        )
    o = cfg.ofdm
    L = o.num_blocks * (o.block_len + o.guard_len)
    if zero_input:
        w_d = np.zeros((L, 2))
    else:
        w_d = generate_ofdm_bpsk(
            o.num_blocks, o.block_len, o.guard_len,
            o.seed if seed is None else seed,
        )
    tr = simulate(cfg.params, ctrl, w_d)
    total = tr.z.shape[0]
    w_pad = np.zeros((total, 2))
    w_pad[: tr.w.shape[0]] = tr.w
    abs_z = np.sqrt(np.sum(tr.z**2, axis=1))
    r = lambda v: repr(float(v))
    _write_csv(
        out / "trace.csv",
        ["k", "t", "w1", "w2", "u1", "u2", "z1", "z2", "abs_z"],
        (
            [k, r(tr.t[k]), r(w_pad[k, 0]), r(w_pad[k, 1]),
             r(tr.u[k, 0]), r(tr.u[k, 1]),
             r(tr.z[k, 0]), r(tr.z[k, 1]), r(abs_z[k])]
            for k in range(total)
        ),
    )
    n_sym = tr.u_d.shape[0]
    wd_pad = np.zeros((n_sym, 2))
    wd_pad[: tr.w_d.shape[0]] = tr.w_d
    _write_csv(
        out / "symbols.csv",
        ["n", "wd1", "wd2", "ud1", "ud2", "zd1", "zd2"],
        (
            [n, r(wd_pad[n, 0]), r(wd_pad[n, 1]),
             r(tr.u_d[n, 0]), r(tr.u_d[n, 1]),
             r(tr.z_d[n, 0]), r(tr.z_d[n, 1])]
            for n in range(n_sym)
        ),
    )
    if zero_input:
        print("energy_ratio = 0.0")
        print("peak_abs_z = 0.0")
        print("evm = 0.0")
    else:
        met = error_metrics(tr)
        print(f"energy_ratio = {met.energy_ratio!r}")
        print(f"peak_abs_z = {met.peak_abs_z!r}")
        print(f"evm = {met.evm!r}")
    print(f"gamma_certified = {tr.gamma_used!r}")
    print(f"trace: {out / 'trace.csv'} ({total} rows)")
    print(f"symbols: {out / 'symbols.csv'} ({n_sym} rows)")
    return 0


def cmd_pulse(cfg: RunConfig, out_override=None) -> int:
    out = _out_dir(cfg, out_override)
    pulse = srrc_taps(cfg.params.beta, cfg.params.N, cfg.params.N_p, cfg.params.h)
    _write_csv(
        out / "pulse.csv",
        ["k", "tap"],
        ([k, repr(float(v))] for k, v in enumerate(pulse.taps)),
    )
    energy = float(np.sum(pulse.taps**2))
    offdiag = gram_offdiagonal(pulse)
    print(f"taps = {pulse.taps.size}")
    print(f"energy = {energy!r}")
    print("gram_offdiagonals = " + " ".join(f"{v:.3e}" for v in offdiag))
    print(f"pulse: {out / 'pulse.csv'}")
    return 0


def cmd_norm(cfg: RunConfig, controller_path) -> int:
    ctrl, cfg_hash, _ = load_controller(controller_path)
    if cfg_hash != cfg.design_hash:
        raise ConfigError(
            f"controller artifact was designed for config hash {cfg_hash}, "
            f"this config hashes to {cfg.design_hash}"
        )
    pulse = srrc_taps(cfg.params.beta, cfg.params.N, cfg.params.N_p, cfg.params.h)
    plant = build_generalized_plant(cfg.params, pulse)
    cl = close_loop(plant, ctrl)
    rho = cl.spectral_radius()
    if rho >= 1:
        print(f"closed_loop: spectral_radius={rho:.6f}")
        print("stable: false")
        return 1
    norm = hinf_norm(cl, tol=max(1e-12, 2e-5 * ctrl.gamma_certified))
    ok = norm <= ctrl.gamma_certified * (1 + 1e-4)
    print(f"closed_loop: spectral_radius={rho:.6f}")
    print(f"verified_norm = {norm!r}")
    print(f"gamma_certified = {ctrl.gamma_certified!r}")
    print(f"certified: {'true' if ok else 'false'}")
    print("stable: true")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="sicancel",
        description="Design and simulate self-interference cancelers "
        "for full-duplex relays.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_design = sub.add_parser("design", help="synthesize the canceler")
    p_design.add_argument("config")
    p_design.add_argument("--out-dir", default=None)

    p_sim = sub.add_parser("simulate", help="closed-loop run with CSV traces")
    p_sim.add_argument("config")
    p_sim.add_argument("controller")
    p_sim.add_argument("--out-dir", default=None)
    p_sim.add_argument("--seed", type=int, default=None)
    p_sim.add_argument("--zero-input", action="store_true")

    p_pulse = sub.add_parser("pulse", help="dump the basis pulse taps")
    p_pulse.add_argument("config")
    p_pulse.add_argument("--out-dir", default=None)

    p_norm = sub.add_parser("norm", help="re-verify a controller artifact")
    p_norm.add_argument("config")
    p_norm.add_argument("controller")

    args = parser.parse_args(argv)
    try:
        cfg = parse_config(args.config)
        if args.command == "design":
            return cmd_design(cfg, args.out_dir)
        if args.command == "simulate":
            return cmd_simulate(
                cfg, args.controller, args.out_dir, args.seed, args.zero_input
            )
        if args.command == "pulse":
            return cmd_pulse(cfg, args.out_dir)
        if args.command == "norm":
            return cmd_norm(cfg, args.controller)
        raise AssertionError(args.command)
    except (ConfigError, PlantError, ValueError, RuntimeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
