"""Command-line front end.

Subcommands: verify, lemmas, table, codeword, minpoly.  Every run
emits one JSON report; big integers are serialized as decimal strings
so no consumer ever rounds them.  Exit codes: 0 all checks passed,
1 a verified claim failed, 2 invalid parameters, 3 internal error or
resource budget exceeded.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from . import counting, spectrum
from .charsum import batch_T_values
from .code import (
    CodeParams,
    codeword_weight_direct,
    lfsr_membership,
    make_context,
    parity_check_factors,
    parity_check_polynomial,
    validate_params,
)
from .errors import InternalError, ParameterError, VerificationFailure
from .quadform import classify
from .spectrum import (
    CheckEntry,
    ValueDistribution,
    VerificationReport,
    WeightHistogram,
)

ARRAY_SWEEP_CAP = 1 << 28  # q^3 cap for the in-memory oracle/classifier arrays


def _params_dict(params: CodeParams, ctx) -> dict:
    return {
        "p": params.p, "m": params.m, "k": params.k, "t": params.t,
        "d": params.d, "s": params.s, "m0": params.m0,
        "q": params.q, "q0": params.q0, "q0_mod4": params.q0_mod4,
        "d1": params.d1, "d2": params.d2,
        "lambda": params.lam,
        "modulus": list(ctx.params.modulus),
        "pi": ctx.pi,
    }


def _vd_json(vd: ValueDistribution | None):
    if vd is None:
        return []
    return [{"t": str(v), "freq": str(c)} for v, c in sorted(vd.freqs.items())]


def _wh_json(wh: WeightHistogram | None):
    if wh is None:
        return []
    return [{"w": w, "freq": str(c)} for w, c in sorted(wh.freqs.items())]


def report_json(report: VerificationReport, ctx, extra: dict | None = None) -> dict:
    out = {
        "params": _params_dict(report.params, ctx),
        "mode": report.mode,
        "checks": [{"name": c.name, "expected": c.expected,
                    "actual": c.actual, "pass": c.passed} for c in report.checks],
        "value_distribution": _vd_json(report.value_distribution),
        "weight_distribution": _wh_json(report.weight_distribution),
        "runtime_ms": report.runtime_ms,
    }
    if extra:
        out.update(extra)
    return out


def _dist_check(report: VerificationReport, name: str, expected: dict, actual: dict):
    report.add(name, sorted(expected.items()), sorted(actual.items()))


def _run_verify(params: CodeParams, ctx, mode: str, samples: int, seed: int,
                workers: int | None) -> VerificationReport:
    report = VerificationReport(params=params, mode=mode)
    t1 = spectrum.table1_closed_form(params)
    t2 = spectrum.table2_closed_form(params)
    report.add("table1 total == q^3", params.q ** 3, t1.total())
    report.add("table2 total == q^3", params.q ** 3, t2.total())
    report.add("minimum distance formula", t2.min_nonzero_weight(),
               (params.p ** params.t - 1)
               * (params.p ** (params.m - params.t)
                  - params.p ** ((params.m + 3 * params.d - 2 * params.t) // 2)))

    if mode == "full":
        vd = spectrum.enumerate_distribution(params, ctx, workers=workers)
        _dist_check(report, "enumerated T distribution == Table 1", t1.freqs, vd.freqs)
        wh = spectrum.distribution_to_weights(params, vd)
        _dist_check(report, "enumerated weights == Table 2", t2.freqs, wh.freqs)
        closed = counting.moment_closed_forms(params)
        for j in (1, 2, 3):
            report.add(f"enumerated moment j={j}", closed[j], vd.moment(j))
        for j in (1, 2, 3, 4):
            report.add(f"histogram moment j={j}", vd.moment(j),
                       counting.moment(params, ctx, j))
        if params.q ** 3 <= ARRAY_SWEEP_CAP:
            t_cls = spectrum.enumerate_t_array(params, ctx)
            t_orc = batch_T_values(params, ctx)
            report.add_bool("character-sum oracle == classifier on all triples",
                            bool(np.array_equal(t_cls, t_orc)))
        report.value_distribution = vd
        report.weight_distribution = wh
    elif mode == "moments":
        vd = spectrum.moment_solve_distribution(params, ctx)
        _dist_check(report, "moment-method distribution == Table 1", t1.freqs, vd.freqs)
        wh = spectrum.distribution_to_weights(params, vd)
        _dist_check(report, "moment-method weights == Table 2", t2.freqs, wh.freqs)
        report.value_distribution = vd
        report.weight_distribution = wh
    elif mode == "sample":
        sc = spectrum.sample_check(params, ctx, samples, seed)
        report.checks.extend(sc.checks)
        report.value_distribution = t1
        report.weight_distribution = t2
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    return report


def _run_lemmas(params: CodeParams, ctx, workers: int | None) -> VerificationReport:
    report = VerificationReport(params=params, mode="lemmas")
    for ch in counting.verify_counting_lemmas(params, ctx):
        report.add(ch.name, ch.expected, ch.actual)
    for ch in counting.sublemma_distributions(params, ctx):
        report.add(ch.name, ch.expected, ch.actual)
    closed = counting.moment_closed_forms(params)
    for j in (1, 2, 3, 4):
        report.add(f"power sum j={j}", closed[j], counting.moment(params, ctx, j))
    return report


def _run_table(params: CodeParams, ctx, which: int) -> VerificationReport:
    report = VerificationReport(params=params, mode=f"table{which}")
    if which == 1:
        vd = spectrum.table1_closed_form(params)
        report.add("total == q^3", params.q ** 3, vd.total())
        report.value_distribution = vd
    else:
        wh = spectrum.table2_closed_form(params)
        report.add("total == q^3", params.q ** 3, wh.total())
        report.weight_distribution = wh
    return report


def _run_codeword(params: CodeParams, ctx, a: int, b: int, c: int) -> VerificationReport:
    report = VerificationReport(params=params, mode="codeword")
    for name, v in (("a", a), ("b", b), ("c", c)):
        if not 0 <= v < params.q:
            raise ParameterError(f"{name}={v} outside [0, q)")
    fc = classify(params, ctx, a, b, c)
    w_direct = codeword_weight_direct(params, ctx, a, b, c)
    w_formula = spectrum.weight_from_T(params, fc.t_value)
    report.add("direct weight == weight from T", w_formula, w_direct)
    report.add_bool("codeword satisfies parity-check recurrence",
                    lfsr_membership(params, ctx, a, b, c))
    report.checks.append(CheckEntry("classification",
                                    f"rank in [{max(0, params.s - 4)}, {params.s}]",
                                    f"rank={fc.rank} disc={fc.disc_class} T={fc.t_value}",
                                    True))
    report.weight_distribution = WeightHistogram({w_direct: 1})
    return report


def _run_minpoly(params: CodeParams, ctx) -> tuple[VerificationReport, dict]:
    report = VerificationReport(params=params, mode="minpoly")
    factors = parity_check_factors(params, ctx)
    h = parity_check_polynomial(params, ctx)
    for i, f in enumerate(factors):
        report.add(f"deg h{i} == m0", params.m0, f.degree)
    report.add("deg h0 h1 h2 == 3 m0", 3 * params.m0, h.degree)
    report.add("factors pairwise distinct", 3, len({f.coeffs for f in factors}))
    extra = {"polynomials": {
        "h0": list(factors[0].coeffs),
        "h1": list(factors[1].coeffs),
        "h2": list(factors[2].coeffs),
        "h": list(h.coeffs),
    }}
    return report, extra


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="weightdist",
        description="Exact verification of the five-weight cyclic code family")
    sub = ap.add_subparsers(dest="command", required=True)

    def add_param_args(sp):
        sp.add_argument("--p", type=int, required=True, help="odd prime")
        sp.add_argument("--m", type=int, required=True, help="extension degree")
        sp.add_argument("--k", type=int, required=True, help="exponent parameter")
        sp.add_argument("--t", type=int, required=True, help="alphabet subfield degree")
        sp.add_argument("--out", type=str, default=None, help="write JSON here")

    sp = sub.add_parser("verify", help="check Tables 1 and 2 by the selected mode")
    add_param_args(sp)
    sp.add_argument("--mode", choices=["full", "moments", "sample"], default="moments")
    sp.add_argument("--samples", type=int, default=100000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--workers", type=int, default=None,
                    help="default: WEIGHTDIST_WORKERS or cpu count")

    sp = sub.add_parser("lemmas", help="verify all counting lemmas exhaustively")
    add_param_args(sp)
    sp.add_argument("--workers", type=int, default=None)

    sp = sub.add_parser("table", help="print a closed-form table")
    add_param_args(sp)
    sp.add_argument("--which", type=int, choices=[1, 2], required=True)

    sp = sub.add_parser("codeword", help="weight and classification of one triple")
    add_param_args(sp)
    sp.add_argument("--a", type=int, required=True)
    sp.add_argument("--b", type=int, required=True)
    sp.add_argument("--c", type=int, required=True)

    sp = sub.add_parser("minpoly", help="parity-check factors and their product")
    add_param_args(sp)
    return ap


def run(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    started = time.monotonic()
    try:
        params = validate_params(args.p, args.m, args.k, args.t)
        ctx = make_context(params)
        extra = None
        if args.command == "verify":
            report = _run_verify(params, ctx, args.mode, args.samples,
                                 args.seed, args.workers)
        elif args.command == "lemmas":
            report = _run_lemmas(params, ctx, args.workers)
        elif args.command == "table":
            report = _run_table(params, ctx, args.which)
        elif args.command == "codeword":
            report = _run_codeword(params, ctx, args.a, args.b, args.c)
        else:
            report, extra = _run_minpoly(params, ctx)
    except ParameterError as exc:
        print(f"parameter error: {exc}", file=sys.stderr)
        return 2
    except VerificationFailure as exc:
        print(f"verification failure: {exc}", file=sys.stderr)
        return 1
    except (InternalError, MemoryError) as exc:
        print(f"internal error: {exc}", file=sys.stderr)
        return 3

    report.runtime_ms = int((time.monotonic() - started) * 1000)
    payload = report_json(report, ctx, extra)
    text = json.dumps(payload, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if report.all_passed else 1


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
