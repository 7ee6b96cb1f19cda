"""Command-line front end: ``run``, ``gate`` and ``verify``.

Exit status is 0 on success, 2 for usage errors and 3 when a numerical
contract fails (cutoff, step size, failed verification).
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import CutoffError, NumericalContractError, StepSizeError, UsageError
from .propagator import gate_design
from .scenarios import PRESETS, SimulationConfig, run_scenario
from .verify import report, run_checks

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3

log = logging.getLogger("uscgate")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _int_list(text: str) -> list[int]:
    return [int(x) for x in _float_list(text)]


def _n_max(text: str):
    if text == "auto":
        return "auto"
    try:
        return int(text)
    except ValueError as exc:
        raise UsageError("--n-max takes 'auto' or an integer") from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="uscgate", description="Ultrastrong-coupling qubit/boson gate simulator.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    run = sub.add_parser("run", help="compute a figure scenario and write CSV files")
    run.add_argument("--scenario", required=True, choices=sorted(PRESETS))
    run.add_argument("--config", type=Path, help="JSON file with parameter overrides")
    run.add_argument("--out", type=Path, required=True, help="output directory")
    run.add_argument("--n-max", type=_n_max, help="Fock cutoff or 'auto'")
    run.add_argument("--n-values", type=_int_list, help="qubit counts, comma separated")
    run.add_argument("--g", type=float, help="dimensionless coupling")
    run.add_argument("--g-values", type=_float_list, help="couplings for fig4, comma separated")
    run.add_argument("--epsilon-values", type=_float_list, help="qubit splittings for fig6/fig7")
    run.add_argument("--tau-stop-pi", type=float, help="final time in units of pi")
    run.add_argument("--tau-step-pi", type=float, help="output spacing in units of pi")
    run.add_argument("--step", type=float, help="RK4 step for fig6/fig7")

    gate = sub.add_parser("gate", help="coupling and gate time for a target twisting")
    gate.add_argument("--beta", type=float, required=True, help="twisting strength s = pi*beta")
    gate.add_argument("--n", type=int, default=1, help="revolution index")
    gate.add_argument("--G", type=float, help="dimensional coupling in rad/s")

    ver = sub.add_parser("verify", help="run the oracle checks")
    ver.add_argument("--quick", action="store_true", help="smaller grids")
    return p


def _load_config(args) -> SimulationConfig:
    values = {}
    if args.config is not None:
        try:
            values = json.loads(args.config.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(values, dict):
            raise UsageError("config must be a JSON object")
        if values.get("scenario", args.scenario) != args.scenario:
            raise UsageError("config scenario differs from --scenario")
    for key in ("n_max", "n_values", "g", "g_values", "epsilon_values", "tau_stop_pi", "tau_step_pi", "step"):
        val = getattr(args, key)
        if val is not None:
            values[key] = val
    return SimulationConfig.from_mapping(args.scenario, values)


def cmd_run(args) -> int:
    cfg = _load_config(args)
    for path in run_scenario(cfg, args.out):
        print(path)
    return EXIT_OK


def cmd_gate(args) -> int:
    d = gate_design(args.beta, args.n, args.G)
    rows = [("beta", d.beta), ("n", d.n), ("g", d.g), ("tau_d", d.tau_d),
            ("tau_ent", ", ".join(f"{t:.12g}" for t in d.entangling_times()))]
    if d.G is not None:
        rows += [("G_rad_per_s", d.G), ("omega_rad_per_s", d.omega), ("t_gate_s", d.t_gate)]
    for k, v in rows:
        print(f"{k}\t{v if isinstance(v, str) else format(v, '.12g')}")
    return EXIT_OK


def cmd_verify(args) -> int:
    results = run_checks(quick=args.quick)
    sys.stdout.write(report(results))
    worst = max(r.residual for r in results if r.threshold >= 1e-7)
    print(f"# max oracle residual {worst:.3e}")
    return EXIT_OK if all(r.passed for r in results) else EXIT_NUMERIC


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        return {"run": cmd_run, "gate": cmd_gate, "verify": cmd_verify}[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except CutoffError as exc:
        hint = f" (try n_max={exc.suggested_n_max})" if exc.suggested_n_max else ""
        print(f"cutoff error: {exc}{hint}", file=sys.stderr)
        return EXIT_NUMERIC
    except StepSizeError as exc:
        hint = f" (try step={exc.suggested_step:g})" if exc.suggested_step else ""
        print(f"step size error: {exc}{hint}", file=sys.stderr)
        return EXIT_NUMERIC
    except NumericalContractError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
