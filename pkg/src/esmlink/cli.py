"""Command-line surface: dump, verify, table, bound, simulate, bench.

Every file-emitting command writes bit-exact CSV (UTF-8, LF, C locale)
plus a JSON run manifest alongside it; repeated invocations with the same
flags produce byte-identical CSV bodies.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__
from .analysis import bound_curve, certify_min_distance, energy_table
from .codebooks import (
    SCHEMES,
    SingleUseCodebook,
    TwoUseCodebook,
    build_codebook,
    verify_alpha_beta,
)
from .constellations import named_constellations
from .simulator import CerPoint, SimConfig, run_cer

_TABLE_I = {
    ("msm", 16): Fraction(20),
    ("esm1", 16): Fraction(16),
    ("esm2", 16): Fraction(13),
    ("esm3", 16): Fraction(12),
    ("msm", 64): Fraction(84),
    ("esm1", 64): Fraction(64),
    ("esm2", 64): Fraction(195, 4),
    ("esm3", 64): Fraction(343, 8),
}


def _fmt(x: float) -> str:
    return format(float(x), ".10g")


def parse_snr_grid(text: str) -> tuple[float, ...]:
    """Inclusive start:step:stop grid in dB."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError("SNR grid must be start:step:stop")
    start, step, stop = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise ValueError("SNR grid must have positive step and stop >= start")
    n = int((stop - start) / step + 1e-9) + 1
    return tuple(start + k * step for k in range(n))


def _write_output(path: str, body: str, args: argparse.Namespace) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(body)
    digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
    manifest = {
        "command": " ".join(sys.argv),
        "seed": getattr(args, "seed", None),
        "version": __version__,
        "timestamp": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
        "outputs": {path: digest},
    }
    with open(path + ".manifest.json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(manifest, fh, indent=2)
        fh.write("\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_dump(args) -> int:
    if args.codebook:
        cb = build_codebook(args.codebook, args.modulation)
        lines = ["index,slot,antenna,re,im"]
        if isinstance(cb, TwoUseCodebook):
            lines.insert(0, "# factored: codeword index = [order_bit | ps_index | tf_index]")
            for tag, space in (("ps", cb.ps), ("tf", cb.tf)):
                lines.append(f"# factor {tag}")
                lines.extend(_codebook_rows(space))
        else:
            lines.extend(_codebook_rows(cb))
        _write_output(args.out, "\n".join(lines) + "\n", args)
        return 0
    sets = named_constellations()
    names = [args.constellation] if args.constellation else sorted(sets)
    lines = ["name,index,re,im,energy"]
    for name in names:
        if name not in sets:
            raise ValueError(f"unknown constellation {name!r}")
        for k, p in enumerate(sets[name].points):
            lines.append(f"{name},{k},{p.re},{p.im},{p.energy()}")
    _write_output(args.out, "\n".join(lines) + "\n", args)
    return 0


def _codebook_rows(cb: SingleUseCodebook):
    words = cb.words_int()
    for idx in range(cb.n_words):
        for ant in range(cb.n_t):
            re, im = int(words[idx, ant, 0]), int(words[idx, ant, 1])
            if re or im:
                yield f"{idx},0,{ant},{re},{im}"


def cmd_verify(args) -> int:
    cb = build_codebook(args.scheme, args.modulation)
    checks: list[tuple[str, bool, str]] = []

    expected_b = (2 + 2 * int(np.log2(cb.m))) * cb.n_c
    distinct = _all_distinct(cb)
    checks.append(
        (
            "cardinality",
            cb.n_words == 1 << expected_b and distinct,
            f"{cb.n_words} words, b={cb.b}, distinct={distinct}",
        )
    )
    energy = cb.avg_energy_per_use()
    want = _TABLE_I[(cb.scheme, cb.m)]
    checks.append(("energy", energy == want, f"{float(energy)} (expected {float(want)})"))
    l2 = certify_min_distance(cb)
    checks.append(("min_distance", l2 == 4, f"L2min={l2}"))
    checks.append(("sparsity", _sparsity_ok(cb), f"{cb.n_a} active per column"))
    report = verify_alpha_beta(cb)
    checks.append(
        (
            "alpha_beta",
            report.passed,
            f"alpha_min={report.alpha_min}, beta_min={report.beta_min}",
        )
    )

    ok = all(c[1] for c in checks)
    for name, passed, detail in checks:
        print(f"{name}: {'pass' if passed else 'FAIL'} ({detail})")
    print(f"verify {cb.scheme} m={cb.m}: {'pass' if ok else 'FAIL'}")
    return 0 if ok else 1


def _all_distinct(cb) -> bool:
    if isinstance(cb, TwoUseCodebook):
        if cb.n_words <= (1 << 20):
            w = cb.words_int().reshape(cb.n_words, -1)
        else:
            # factor distinctness implies joint distinctness: column parity
            # separates the two vector spaces, so no S1 word can equal an
            # S2 word; sample the composition as a cross-check
            if not (_all_distinct(cb.ps) and _all_distinct(cb.tf)):
                return False
            rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(0)))
            idx = rng.choice(cb.n_words, size=4096, replace=False)
            samples = {cb.word_at(int(i)).ints.tobytes() for i in idx}
            return len(samples) == len(idx)
    else:
        w = cb.words_int().reshape(cb.n_words, -1)
    packed = np.ascontiguousarray(w).view([("", w.dtype)] * w.shape[1])
    return len(np.unique(packed)) == cb.n_words


def _sparsity_ok(cb) -> bool:
    if isinstance(cb, TwoUseCodebook):
        return _sparsity_ok(cb.ps) and _sparsity_ok(cb.tf)
    w = cb.words_int()
    active = (w != 0).any(axis=2).sum(axis=1)
    return bool((active == cb.n_a).all())


def cmd_table(args) -> int:
    lines = ["scheme,bpcu,energy,gain_db_vs_msm"]
    for row in energy_table():
        lines.append(f"{row.scheme},{row.bpcu},{_fmt(row.energy)},{_fmt(row.gain_db_vs_msm)}")
    _write_output(args.out, "\n".join(lines) + "\n", args)
    return 0


def cmd_bound(args) -> int:
    cb = build_codebook(args.scheme, args.modulation)
    curve = bound_curve(cb, list(args.snr), args.nr)
    lines = ["scheme,M,n_r,snr_db,apep,cer_bound"]
    for snr_db, apep, cer in curve.points:
        lines.append(
            f"{curve.scheme},{curve.m},{curve.n_r},{_fmt(snr_db)},{_fmt(apep)},{_fmt(cer)}"
        )
    _write_output(args.out, "\n".join(lines) + "\n", args)
    return 0


def simulate_csv(cfg: SimConfig, points: list[CerPoint]) -> str:
    lines = [f"# seed={cfg.seed} decoder={cfg.decoder}"]
    lines.append("scheme,M,n_r,snr_db,trials,errors,cer,ci95_half_width,mean_nodes")
    for p in points:
        lines.append(
            f"{cfg.scheme},{cfg.m},{cfg.n_r},{_fmt(p.snr_db)},{p.trials},{p.errors},"
            f"{_fmt(p.cer)},{_fmt(p.ci95_half_width)},{_fmt(p.mean_nodes)}"
        )
    flagged = [p for p in points if p.low_confidence]
    for p in flagged:
        lines.append(f"# low_confidence snr_db={_fmt(p.snr_db)}")
    return "\n".join(lines) + "\n"


def cmd_simulate(args) -> int:
    cfg = SimConfig(
        scheme=args.scheme,
        m=args.modulation,
        n_r=args.nr,
        snr_db=args.snr,
        max_trials=args.trials,
        target_errors=args.target_errors,
        seed=args.seed,
        decoder=args.decoder,
        workers=args.workers,
    )
    points = run_cer(cfg)
    _write_output(args.out, simulate_csv(cfg, points), args)
    return 0


def cmd_bench(args) -> int:
    from .bench import run_benchmark

    rows = run_benchmark(trials=args.trials, n_r=args.nr, snr_db=args.snr_point)
    header = "backend,method,trials,seconds,trials_per_sec"
    print(header)
    body = [header]
    for r in rows:
        line = f"{r.backend},{r.method},{r.trials},{_fmt(r.seconds)},{_fmt(r.rate)}"
        print(line)
        body.append(line)
    if args.out:
        _write_output(args.out, "\n".join(body) + "\n", args)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="esmlink", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dump", help="write constellations or a codebook as CSV")
    p.add_argument("--constellation", help="dump a single named constellation")
    p.add_argument("--codebook", choices=SCHEMES, help="dump a codebook instead")
    p.add_argument("--modulation", type=int, default=16, choices=(16, 64))
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_dump)

    p = sub.add_parser("verify", help="check the design invariants of a codebook")
    p.add_argument("--scheme", required=True, choices=SCHEMES)
    p.add_argument("--modulation", type=int, required=True, choices=(16, 64))
    p.set_defaults(fn=cmd_verify)

    p = sub.add_parser("table", help="write the average-energy table as CSV")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_table)

    p = sub.add_parser("bound", help="write union-bound CER curves as CSV")
    p.add_argument("--scheme", required=True, choices=SCHEMES)
    p.add_argument("--modulation", type=int, required=True, choices=(16, 64))
    p.add_argument("--nr", type=int, required=True)
    p.add_argument("--snr", type=parse_snr_grid, required=True, metavar="START:STEP:STOP")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_bound)

    p = sub.add_parser("simulate", help="Monte Carlo CER estimation")
    p.add_argument("--scheme", required=True, choices=SCHEMES)
    p.add_argument("--modulation", type=int, required=True, choices=(16, 64))
    p.add_argument("--nr", type=int, required=True)
    p.add_argument("--snr", type=parse_snr_grid, required=True, metavar="START:STEP:STOP")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1_000_000, help="max trials per SNR point")
    p.add_argument("--target-errors", type=int, default=100)
    p.add_argument("--decoder", choices=("exhaustive", "sphere"), default="sphere")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_simulate)

    p = sub.add_parser("bench", help="compare the numba and numpy decoder backends")
    p.add_argument("--trials", type=int, default=2048)
    p.add_argument("--nr", type=int, default=8)
    p.add_argument("--snr-point", type=float, default=10.0)
    p.add_argument("--out")
    p.set_defaults(fn=cmd_bench)

    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except (ValueError, OSError, MemoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
