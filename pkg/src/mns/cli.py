"""Command-line front end.

Subcommands: bs-sample, iqp-sample, ere-sweep, bond-dim,
commutation-check, oracle-compare.  Option values resolve in the order
command line > MNS_<NAME> environment variable > --config file
(flat ``key=value`` lines) > built-in default.  Errors print one JSON
object to stderr and exit with a distinct code: 2 usage, 3 invalid
parameter, 4 unreadable circuit file, 5 resource limit.
"""

from __future__ import annotations

import argparse
import itertools
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import analysis, iqp, oracle, photonic
from .errors import CircuitParseError, CutoffError, ResourceLimitError
from .linalg import renyi_entropy

_UNSET = object()

_EXIT_USAGE = 2
_EXIT_PARAM = 3
_EXIT_CIRCUIT = 4
_EXIT_RESOURCE = 5

_CSV_HEADER = "N,eta_or_p,alpha,theta_mode,chi,memory_bytes,entropy"


class CliError(Exception):
    def __init__(self, code: int, kind: str, detail: str):
        super().__init__(detail)
        self.code = code
        self.kind = kind


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as JSON with exit code 2."""

    def error(self, message):
        raise CliError(_EXIT_USAGE, "usage", message)


def _emit_error(kind: str, detail: str):
    sys.stderr.write(json.dumps({"error": kind, "detail": detail}) + "\n")


# ---------------------------------------------------------------------------
# Option resolution (flags > env > config > default)
# ---------------------------------------------------------------------------

def _cast(name: str, raw, kind: str, choices=None):
    try:
        if kind == "int":
            value = int(raw)
        elif kind == "float":
            value = float(raw)
        elif kind == "bool":
            if isinstance(raw, bool):
                value = raw
            elif str(raw).lower() in ("1", "true", "yes", "on"):
                value = True
            elif str(raw).lower() in ("0", "false", "no", "off"):
                value = False
            else:
                raise ValueError(raw)
        else:
            value = str(raw)
    except (TypeError, ValueError):
        raise CliError(_EXIT_PARAM, "invalid-parameter",
                       f"option {name}: cannot parse {raw!r} as {kind}") from None
    if not (np.isfinite(value) if kind == "float" else True):
        raise CliError(_EXIT_PARAM, "invalid-parameter", f"option {name}: {raw!r} is not finite")
    if choices is not None and value not in choices:
        raise CliError(_EXIT_PARAM, "invalid-parameter",
                       f"option {name}: {value!r} not one of {sorted(choices)}")
    return value


def _load_config(path) -> dict:
    if path is None or path is _UNSET:
        return {}
    try:
        with open(path) as fh:
            lines = fh.readlines()
    except OSError as exc:
        raise CliError(_EXIT_PARAM, "invalid-parameter", f"cannot read config file: {exc}") from None
    out = {}
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(_EXIT_PARAM, "invalid-parameter",
                           f"config line {lineno}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        out[key.strip().replace("-", "_")] = value.strip()
    return out


class _Options:
    """One resolved view over argparse results, environment, and config."""

    def __init__(self, args, config):
        self._args = args
        self._config = config

    def get(self, name: str, kind: str, default=None, choices=None):
        value = getattr(self._args, name, _UNSET)
        if value is _UNSET or value is None:
            env = os.environ.get("MNS_" + name.upper())
            if env is not None:
                value = env
            elif name in self._config:
                value = self._config[name]
            else:
                return default
        return _cast(name, value, kind, choices)

    def require(self, name: str, kind: str, choices=None):
        value = self.get(name, kind, default=None, choices=choices)
        if value is None:
            raise CliError(_EXIT_PARAM, "invalid-parameter", f"option {name} is required")
        return value


def _positive(opts, name, kind="int", default=None, required=False, minimum=None):
    value = opts.require(name, kind) if required else opts.get(name, kind, default)
    if value is not None and minimum is not None and value < minimum:
        raise CliError(_EXIT_PARAM, "invalid-parameter", f"option {name}: {value} < {minimum}")
    return value


def _unit_interval(opts, name, default=None, required=False, top=1.0):
    value = opts.require(name, "float") if required else opts.get(name, "float", default)
    if value is not None and not 0.0 <= value <= top:
        raise CliError(_EXIT_PARAM, "invalid-parameter",
                       f"option {name}: {value} outside [0, {top}]")
    return value


def _seed(opts) -> int:
    value = opts.get("seed", "int", 0)
    if not 0 <= value < 1 << 64:
        raise CliError(_EXIT_PARAM, "invalid-parameter", f"seed must be a 64-bit unsigned int, got {value}")
    return value


def _write_text(output, text: str):
    if output is None:
        sys.stdout.write(text)
    else:
        with open(output, "w") as fh:
            fh.write(text)


def _records_jsonl(records) -> str:
    return "".join(json.dumps(r.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"
                   for r in records)


def _chunked_shots(runner, shots: int, threads: int) -> list:
    """Split a deterministic per-shot sampler over a thread pool; chunk
    results merge in shot order, identical to a single call."""
    if threads <= 1 or shots <= 1:
        return runner(0, shots)
    chunk = -(-shots // threads)
    offsets = list(range(0, shots, chunk))
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(runner, off, min(chunk, shots - off)) for off in offsets]
        records = []
        for fut in futures:
            records.extend(fut.result())
    return records


# ---------------------------------------------------------------------------
# Shared builders
# ---------------------------------------------------------------------------

def _resolve_eta(opts) -> float:
    eta = _unit_interval(opts, "eta")
    eta_layer = _unit_interval(opts, "eta_layer")
    layers = _positive(opts, "loss_layers", minimum=1)
    if eta is not None and eta_layer is not None:
        raise CliError(_EXIT_PARAM, "invalid-parameter", "give either eta or eta-layer, not both")
    if eta_layer is not None:
        return photonic.fold_loss(eta_layer, layers if layers is not None else 1)
    return eta if eta is not None else 1.0


def _build_input_and_gates(opts, seed):
    kind = opts.get("kind", "str", "single", choices={"single", "fock", "cat"})
    photons = _positive(opts, "photons", required=True, minimum=1)
    eta = _resolve_eta(opts)
    family = opts.get("family", "str", "worst", choices={"worst", "brickwall", "ustc"})
    gate_seed = opts.get("gate_seed", "int", seed)
    local_dim = _positive(opts, "local_dim", minimum=2)
    fock_n = _positive(opts, "fock_n", default=1, minimum=1)
    gamma = opts.get("gamma", "float", 1.0)
    parity = opts.get("parity", "str", "odd", choices={"odd", "even"})
    depth = _positive(opts, "depth", default=4, minimum=1)
    input_modes = None

    def spec_for(mode_count):
        try:
            return photonic.LossyInputSpec(kind, mode_count, photons, eta, fock_n=fock_n,
                                           gamma=gamma, parity=parity, local_dim=local_dim,
                                           input_modes=input_modes)
        except ValueError as exc:
            raise CliError(_EXIT_PARAM, "invalid-parameter", str(exc)) from None

    if family == "ustc":
        probe = spec_for(2 * photons)  # validates kind parameters before building gates
        gates, input_modes = photonic.ustc_like_gatelist(photons, gate_seed,
                                                         local_dim=probe.resolved_local_dim())
        modes = 1 + max(max(g.targets) for g in gates)
        spec = spec_for(modes)
        return spec, gates
    modes = _positive(opts, "modes", default=2 * photons, minimum=2)
    spec = spec_for(modes)
    d = spec.resolved_local_dim()
    try:
        if family == "worst":
            gates = photonic.worst_case_gatelist(modes, photons, local_dim=d)
        else:
            gates = photonic.brickwall_gatelist(modes, depth, gate_seed, local_dim=d)
    except ValueError as exc:
        raise CliError(_EXIT_PARAM, "invalid-parameter", str(exc)) from None
    return spec, gates


def _read_circuit(opts):
    path = opts.require("circuit", "str")
    try:
        with open(path) as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise CliError(_EXIT_CIRCUIT, "circuit-file", f"cannot read {path}: {exc}") from None
    qubits = _positive(opts, "qubits", minimum=1)
    try:
        return iqp.parse_iqp_circuit(text, qubit_count=qubits)
    except CircuitParseError as exc:
        raise CliError(_EXIT_CIRCUIT, "circuit-file", f"{path}: {exc}") from None


def _noise_spec(opts) -> iqp.NoiseSpec:
    model = opts.get("noise", "str", "dephasing", choices={"dephasing", "depolarizing"})
    rate = _unit_interval(opts, "rate", default=0.0, top=0.5)
    return iqp.NoiseSpec(model, rate)


def _site_spectrum(kind, eta, theta, fock_n, gamma, parity):
    if kind == "single":
        return analysis.single_photon_site_spectrum(eta, theta)
    if kind == "fock":
        return analysis.fock_site_spectrum(fock_n, eta, theta)
    return analysis.cat_site_spectrum(gamma, parity, eta, theta)


def _csv_row(size, value, alpha, theta_mode, chi, memory, entropy) -> str:
    if not np.isfinite(entropy):
        raise CliError(_EXIT_PARAM, "invalid-parameter", f"entropy is not finite: {entropy}")
    chi_s = "" if chi is None else str(int(chi))
    mem_s = "" if memory is None else repr(float(memory))
    return f"{size},{value!r},{alpha!r},{theta_mode},{chi_s},{mem_s},{entropy!r}\n"


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def _cmd_bs_sample(opts):
    seed = _seed(opts)
    shots = _positive(opts, "shots", default=100, minimum=1)
    threads = _positive(opts, "threads", default=1, minimum=1)
    chi = _positive(opts, "chi", minimum=1)
    spec, gates = _build_input_and_gates(opts, seed)
    records = _chunked_shots(
        lambda off, count: photonic.run_lossy_boson_sampling(spec, gates, chi, count, seed,
                                                             first_shot=off),
        shots, threads)
    _write_text(opts.get("output", "str"), _records_jsonl(records))
    return 0


def _cmd_iqp_sample(opts):
    seed = _seed(opts)
    shots = _positive(opts, "shots", default=100, minimum=1)
    threads = _positive(opts, "threads", default=1, minimum=1)
    chi = _positive(opts, "chi", minimum=1)
    circuit = _read_circuit(opts)
    noise = _noise_spec(opts)
    extra = opts.get("extra_noise_layer", "bool", False)
    records = _chunked_shots(
        lambda off, count: iqp.run_noisy_iqp(circuit, noise, chi, count, seed,
                                             extra_noise_layer=extra, first_shot=off),
        shots, threads)
    _write_text(opts.get("output", "str"), _records_jsonl(records))
    return 0


def _parse_values(opts) -> list:
    raw = opts.require("values", "str")
    try:
        values = [float(v) for v in raw.split(",") if v.strip() != ""]
    except ValueError:
        raise CliError(_EXIT_PARAM, "invalid-parameter", f"cannot parse values {raw!r}") from None
    if not values:
        raise CliError(_EXIT_PARAM, "invalid-parameter", "values is empty")
    return values


def _theta_setting(opts):
    raw = opts.get("theta", "str", "worst")
    if raw == "worst":
        return np.pi / 4.0, "worst"
    theta = _cast("theta", raw, "float")
    return theta, repr(theta)


def _cmd_ere_sweep(opts):
    kind = opts.get("kind", "str", "single", choices={"single", "fock", "cat", "iqp"})
    size = _positive(opts, "size", required=True, minimum=1)
    alpha = opts.require("alpha", "float")
    values = _parse_values(opts)
    epsilon = opts.get("epsilon", "float")
    fock_n = _positive(opts, "fock_n", default=1, minimum=1)
    gamma = opts.get("gamma", "float", 1.0)
    parity = opts.get("parity", "str", "odd", choices={"odd", "even"})
    theta, theta_mode = _theta_setting(opts)
    modes = _positive(opts, "modes", default=2 * size, minimum=1)
    cap = _positive(opts, "cap", default=10 ** 8, minimum=1)
    local_dim = _positive(opts, "local_dim",
                          default=(2 if kind == "iqp" else size * fock_n + 1), minimum=2)
    if kind == "iqp" and epsilon is not None:
        raise CliError(_EXIT_PARAM, "invalid-parameter",
                       "the bond-dimension estimator needs per-site spectra; not defined for iqp")

    rows = [_CSV_HEADER + "\n"]
    for value in values:
        chi = memory = None
        try:
            if kind == "iqp":
                entropy = analysis.iqp_ere_bound(size, value, alpha)
            else:
                spectrum = _site_spectrum(kind, value, theta, fock_n, gamma, parity)
                entropy = size * float(renyi_entropy(spectrum, alpha))
                if epsilon is not None:
                    result = analysis.required_bond_dimension([spectrum] * size, epsilon,
                                                              cap=cap, modes=modes,
                                                              local_dim=local_dim)
                    chi, memory = result.chi, result.memory_bytes
        except (ValueError, CutoffError) as exc:
            raise CliError(_EXIT_PARAM, "invalid-parameter", str(exc)) from None
        rows.append(_csv_row(size, value, alpha, theta_mode if kind != "iqp" else "na",
                             chi, memory, entropy))
    _write_text(opts.get("output", "str"), "".join(rows))
    return 0


def _cmd_bond_dim(opts):
    kind = opts.get("kind", "str", "single", choices={"single", "fock", "cat"})
    size = _positive(opts, "size", required=True, minimum=1)
    eta = _unit_interval(opts, "eta", required=True)
    epsilon = opts.require("epsilon", "float")
    alpha = opts.get("alpha", "float", 1.0)
    fock_n = _positive(opts, "fock_n", default=1, minimum=1)
    gamma = opts.get("gamma", "float", 1.0)
    parity = opts.get("parity", "str", "odd", choices={"odd", "even"})
    theta, theta_mode = _theta_setting(opts)
    modes = _positive(opts, "modes", default=2 * size, minimum=1)
    local_dim = _positive(opts, "local_dim", default=size * fock_n + 1, minimum=2)
    cap = _positive(opts, "cap", default=10 ** 8, minimum=1)
    try:
        spectrum = _site_spectrum(kind, eta, theta, fock_n, gamma, parity)
        entropy = size * float(renyi_entropy(spectrum, alpha))
        result = analysis.required_bond_dimension([spectrum] * size, epsilon, cap=cap,
                                                  modes=modes, local_dim=local_dim)
    except (ValueError, CutoffError) as exc:
        raise CliError(_EXIT_PARAM, "invalid-parameter", str(exc)) from None
    text = _CSV_HEADER + "\n" + _csv_row(size, eta, alpha, theta_mode, result.chi,
                                         result.memory_bytes, entropy)
    _write_text(opts.get("output", "str"), text)
    return 0


def _cmd_commutation_check(opts):
    raw = opts.get("modes", "str", "64,256,1024")
    try:
        mode_sizes = [int(v) for v in raw.split(",") if v.strip() != ""]
    except ValueError:
        raise CliError(_EXIT_PARAM, "invalid-parameter", f"cannot parse modes {raw!r}") from None
    if not mode_sizes or min(mode_sizes) < 2:
        raise CliError(_EXIT_PARAM, "invalid-parameter", "modes must be integers >= 2")
    fraction = _unit_interval(opts, "cut_fraction", default=0.5)
    pairs = _positive(opts, "pairs", default=64, minimum=1)
    trials = _positive(opts, "trials", default=20, minimum=1)
    seed = _seed(opts)
    rows = ["modes,cut,mean_abs,stderr\n"]
    for m in mode_sizes:
        cut = max(1, min(m - 1, int(round(fraction * m))))
        stats = analysis.commutation_statistics(m, cut, pairs, trials, seed)
        rows.append(f"{m},{cut},{stats['mean_abs']!r},{stats['stderr']!r}\n")
    _write_text(opts.get("output", "str"), "".join(rows))
    return 0


def _cmd_oracle_compare(opts):
    target = opts.require("target", "str", choices={"bs", "iqp"})
    seed = _seed(opts)
    shots = _positive(opts, "shots", default=2000, minimum=1)
    threads = _positive(opts, "threads", default=1, minimum=1)
    chi = _positive(opts, "chi", minimum=1)
    if target == "bs":
        spec, gates = _build_input_and_gates(opts, seed)
        exact = oracle.exact_lossy_bs_distribution(spec, gates)
        records = _chunked_shots(
            lambda off, count: photonic.run_lossy_boson_sampling(spec, gates, chi, count, seed,
                                                                 first_shot=off),
            shots, threads)
    else:
        circuit = _read_circuit(opts)
        noise = _noise_spec(opts)
        extra = opts.get("extra_noise_layer", "bool", False)
        exact = oracle.exact_noisy_iqp_distribution(circuit, noise, extra_noise_layer=extra)
        records = _chunked_shots(
            lambda off, count: iqp.run_noisy_iqp(circuit, noise, chi, count, seed,
                                                 extra_noise_layer=extra, first_shot=off),
            shots, threads)
    empirical = oracle.empirical_distribution((r.outcome for r in records), space=exact.keys())
    tvd = oracle.total_variation_distance(exact, empirical)
    failed = sum(1 for r in records if r.outcome is None)
    output = opts.get("output", "str")
    if output is not None:
        oracle.write_distribution_csv(exact, output)
    sys.stdout.write(json.dumps({"target": target, "tvd": tvd, "shots": shots,
                                 "failed_shots": failed, "outcomes": len(exact)},
                                sort_keys=True) + "\n")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

_COMMON = ("seed", "threads", "output", "config")

_SUBCOMMANDS = {
    "bs-sample": (_cmd_bs_sample,
                  ("kind", "photons", "modes", "eta", "eta-layer", "loss-layers", "fock-n",
                   "gamma", "parity", "local-dim", "family", "depth", "gate-seed", "chi",
                   "shots")),
    "iqp-sample": (_cmd_iqp_sample,
                   ("circuit", "qubits", "noise", "rate", "extra-noise-layer", "chi", "shots")),
    "ere-sweep": (_cmd_ere_sweep,
                  ("kind", "size", "alpha", "values", "epsilon", "fock-n", "gamma", "parity",
                   "theta", "modes", "local-dim", "cap")),
    "bond-dim": (_cmd_bond_dim,
                 ("kind", "size", "eta", "epsilon", "alpha", "fock-n", "gamma", "parity",
                  "theta", "modes", "local-dim", "cap")),
    "commutation-check": (_cmd_commutation_check,
                          ("modes", "cut-fraction", "pairs", "trials")),
    "oracle-compare": (_cmd_oracle_compare,
                       ("target", "kind", "photons", "modes", "eta", "eta-layer", "loss-layers",
                        "fock-n", "gamma", "parity", "local-dim", "family", "depth", "gate-seed",
                        "circuit", "qubits", "noise", "rate", "extra-noise-layer", "chi",
                        "shots")),
}

_FLAG_OPTIONS = {"extra-noise-layer"}


def _build_parser() -> _Parser:
    parser = _Parser(prog="mns", description=__doc__)
    subparsers = parser.add_subparsers(dest="command", metavar="SUBCOMMAND")
    for name, (_, options) in _SUBCOMMANDS.items():
        sub = subparsers.add_parser(name)
        for opt in options + _COMMON:
            if opt in _FLAG_OPTIONS:
                sub.add_argument(f"--{opt}", dest=opt.replace("-", "_"),
                                 action="store_true", default=_UNSET)
            else:
                sub.add_argument(f"--{opt}", dest=opt.replace("-", "_"), default=_UNSET)
    return parser


def main(argv=None) -> int:
    try:
        args = _build_parser().parse_args(argv)
        if args.command is None:
            raise CliError(_EXIT_USAGE, "usage", "missing subcommand")
        handler = _SUBCOMMANDS[args.command][0]
        config = _load_config(getattr(args, "config", None))
        return handler(_Options(args, config))
    except CliError as exc:
        _emit_error(exc.kind, str(exc))
        return exc.code
    except ResourceLimitError as exc:
        detail = str(exc)
        if exc.partial is not None:
            detail += f" (partial lower bound {exc.partial})"
        _emit_error("resource-limit", detail)
        return _EXIT_RESOURCE
    except BrokenPipeError:  # piping into head etc.
        return 0


if __name__ == "__main__":
    sys.exit(main())
