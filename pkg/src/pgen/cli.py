"""Command-line entry point and experiment orchestration.

Subcommands: analyze, sweep, mc-annealed, mc-quenched, bounds, mltest,
synth, selftest.  Every run echoes its full result-affecting configuration
into the report; reports are byte-stable given the configuration (master
seed included) no matter how many worker threads run the replicates, so
volatile data like wall-clock time goes to stdout, never into the JSON.

Rationals (rates, interval endpoints, exact probabilities) are serialized
as "p/q" strings throughout; the position threshold floor(lambda b^k) must
be exact, so float rates are rejected.

Exit codes: 0 success, 2 usage, 3 resource limit, 4 data/format.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from pathlib import Path

from . import __version__
from .blockcount import (
    IntervalUnion,
    PositionSet,
    as_fraction,
    count_blocks,
    counts_of_counts,
    floor_scaled,
    incremental_lambda_sweep,
    positions_from_interval_union,
)
from .bounds import (
    annealed_tv_bound,
    janson_tv_bound,
    mcdiarmid_bound,
    o_k_measure_bound,
    quenched_parameters,
    tail_bound,
)
from .errors import PgenError, ResourceLimitError, UsageError
from .mltest import MltestConfig, o_k_membership, t_m_report
from .seqgen import (
    ASCII_FORMAT,
    PACKED_FORMAT,
    Alphabet,
    along_squares,
    champernowne_source,
    derive_stream_seed,
    fibonacci_concat_source,
    file_source,
    iid_uniform_source,
    rudin_shapiro_term,
    thue_morse_term,
    write_ascii,
    write_packed,
)
from .stats import EmpiricalLaw, PoissonLaw, poisson_pmf, sup_deviation, tv_distance
from .synth import SynthConfig, greedy_extend, new_state, score_prefix

DEFAULT_MAX_PREFIX = 1 << 31
SOURCE_FAMILIES = (
    "champernowne",
    "fibonacci",
    "thue-morse-squares",
    "rudin-shapiro-squares",
    "iid",
    "file",
)


def frac_str(f: Fraction) -> str:
    return f"{f.numerator}/{f.denominator}"


def _parse_lambdas(text: str) -> list[Fraction]:
    lams = [as_fraction(part) for part in text.split(",") if part.strip()]
    if not lams:
        raise UsageError("lambda list is empty")
    if any(l <= 0 for l in lams):
        raise UsageError("lambdas must be positive")
    return lams


def _parse_k_values(k, k_range) -> list[int]:
    if k is not None and k_range is not None:
        raise UsageError("give either k or k-range, not both")
    if k is not None:
        return [int(k)]
    if k_range is not None:
        lo, _, hi = str(k_range).partition(":")
        lo, hi = int(lo), int(hi)
        if hi < lo:
            raise UsageError(f"empty k range {k_range}")
        return list(range(lo, hi + 1))
    raise UsageError("k or k-range is required")


def load_config_file(path: str) -> dict[str, str]:
    """Flat key=value lines; '#' starts a comment; blank lines ignored."""
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{lineno}: expected key=value, got {line!r}")
        out[key.strip()] = value.strip()
    return out


class Settings:
    """Merged view of CLI flags over config-file values."""

    def __init__(self, args: argparse.Namespace, file_cfg: dict[str, str]):
        self._args = args
        self._file = file_cfg

    def get(self, key: str, conv=str, default=None):
        cli_val = getattr(self._args, key, None)
        if cli_val is not None:
            return conv(cli_val) if isinstance(cli_val, str) else cli_val
        if key in self._file:
            return conv(self._file[key])
        return default

    def require(self, key: str, conv=str):
        value = self.get(key, conv)
        if value is None:
            raise UsageError(f"missing required parameter '{key}'")
        return value


def build_source(settings: Settings, b: int):
    family = settings.get("source", default="iid")
    if family not in SOURCE_FAMILIES:
        raise UsageError(f"unknown source '{family}', expected one of {SOURCE_FAMILIES}")
    alphabet = Alphabet(b)
    if family == "champernowne":
        return champernowne_source(alphabet)
    if family == "fibonacci":
        return fibonacci_concat_source(alphabet)
    if family == "thue-morse-squares":
        if b != 2:
            raise UsageError("thue-morse-squares emits binary symbols; use b=2")
        return along_squares(thue_morse_term, alphabet, name="thue-morse")
    if family == "rudin-shapiro-squares":
        if b != 2:
            raise UsageError("rudin-shapiro-squares emits binary symbols; use b=2")
        return along_squares(rudin_shapiro_term, alphabet, name="rudin-shapiro")
    if family == "iid":
        return iid_uniform_source(alphabet, settings.get("seed", int, 0))
    path = settings.require("file")
    return file_source(path, alphabet, settings.get("format"))


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, sort_keys=True, indent=2) + "\n")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(str(c) for c in row) + "\n")


def _report_skeleton(command: str, config_echo: dict) -> dict:
    return {
        "tool": {"name": "pgen", "version": __version__},
        "command": command,
        "config": config_echo,
    }


# ---------------------------------------------------------------------------
# analyze / sweep
# ---------------------------------------------------------------------------

def _analyze_one_k(source, b: int, k: int, lambdas: list[Fraction], mem_cap: int, max_prefix: int):
    lams = sorted(set(lambdas))
    required = floor_scaled(lams[-1], b, k) + k - 1
    if required > max_prefix:
        raise ResourceLimitError(
            f"k={k}, lambda={frac_str(lams[-1])} requires a prefix of exactly "
            f"{required} symbols; cap is {max_prefix}"
        )
    snapshots = incremental_lambda_sweep(source, b, k, lams, mem_cap_cells=mem_cap)
    blocks = []
    for lam, coc in zip(lams, snapshots):
        law = EmpiricalLaw.from_counts_of_counts(coc)
        ref = PoissonLaw.from_rational(lam)
        tv = tv_distance(law, ref)
        sd = sup_deviation(law, ref)
        i_top = max(8, law.i_max)
        rows = []
        for i in range(i_top + 1):
            z = law.probability(i)
            pmf = ref.pmf(i)
            rows.append(
                {
                    "i": i,
                    "z_empirical": frac_str(z),
                    "poisson_pmf": pmf,
                    "abs_err": abs(float(z) - pmf),
                }
            )
        blocks.append(
            {
                "k": k,
                "lambda": frac_str(lam),
                "n_positions": coc.n_positions,
                "tv_distance": tv,
                "sup_i": sd.i,
                "sup_deviation": sd.value,
                "exceeds_2_over_k": sd.value > 2.0 / k,
                "rows": rows,
            }
        )
    return blocks


def cmd_analyze(settings: Settings, out_dir: Path, command: str = "analyze") -> dict:
    b = settings.require("b", int)
    ks = _parse_k_values(settings.get("k", int), settings.get("k_range"))
    lambdas = _parse_lambdas(settings.require("lambdas"))
    if command == "sweep" and sorted(lambdas) != lambdas:
        raise UsageError("sweep requires an ascending lambda list")
    mem_cap = settings.get("mem_cap", int, 1 << 28)
    max_prefix = settings.get("max_prefix", int, DEFAULT_MAX_PREFIX)
    source = build_source(settings, b)
    blocks = []
    for k in ks:
        blocks.extend(_analyze_one_k(source, b, k, lambdas, mem_cap, max_prefix))
    report = _report_skeleton(
        command,
        {
            "source": source.id,
            "b": b,
            "k_values": ks,
            "lambdas": [frac_str(l) for l in sorted(set(lambdas))],
            "mem_cap": mem_cap,
            "max_prefix": max_prefix,
        },
    )
    report["results"] = blocks
    _write_json(out_dir / f"{command}.json", report)
    csv_rows = []
    for blk in blocks:
        for row in blk["rows"]:
            csv_rows.append(
                [
                    blk["k"],
                    blk["lambda"],
                    row["i"],
                    row["z_empirical"],
                    repr(row["poisson_pmf"]),
                    repr(row["abs_err"]),
                    repr(blk["tv_distance"]),
                ]
            )
    _write_csv(
        out_dir / f"{command}.csv",
        ["k", "lambda", "i", "z_empirical", "poisson_pmf", "abs_err", "tv_distance"],
        csv_rows,
    )
    return report


# ---------------------------------------------------------------------------
# Monte Carlo experiments
# ---------------------------------------------------------------------------

def _mc_common(settings: Settings):
    b = settings.require("b", int)
    k = settings.require("k", int)
    R = settings.get("replicates", int, 64)
    if R < 2:
        raise UsageError(f"replicates must be >= 2, got {R}")
    master = settings.get("master_seed", int, 0)
    S = IntervalUnion.parse(settings.get("S", default="(0,1]"))
    threads = settings.get("threads", int, 1)
    seeds = [derive_stream_seed(master, r) for r in range(R)]
    if len(set(seeds)) != R:
        raise UsageError("derived replicate seeds collide; change master seed")
    return b, k, R, master, S, threads, seeds


def _run_replicates(fn, R: int, threads: int) -> list:
    """Run fn(r) for r in 0..R-1 and return results ordered by replicate
    index; the merge order is fixed so thread count cannot change output."""
    if threads <= 1:
        return [fn(r) for r in range(R)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(R)))


def cmd_mc_annealed(settings: Settings, out_dir: Path) -> dict:
    b, k, R, master, S, threads, seeds = _mc_common(settings)
    mem_cap = settings.get("mem_cap", int, 1 << 28)
    positions = positions_from_interval_union(S, b, k)
    bk = b**k

    def one(r: int) -> dict[int, int]:
        src = iid_uniform_source(Alphabet(b), seeds[r])
        return counts_of_counts(count_blocks(src, b, k, positions, mem_cap_cells=mem_cap)).table

    tables = _run_replicates(one, R, threads)
    support = sorted(set().union(*tables))
    mean_probs = {
        i: Fraction(sum(t.get(i, 0) for t in tables), R * bk) for i in support
    }
    mean_law = EmpiricalLaw(b, k, {i: p for i, p in mean_probs.items() if p})
    measure = S.measure
    ref = PoissonLaw.from_rational(measure)
    tv = tv_distance(mean_law, ref)
    jb = janson_tv_bound(measure, S.n, b, k)
    band = 4.0 / math.sqrt(R * bk)
    mean_count = Fraction(positions.total, bk)
    rows = [
        {
            "i": i,
            "mean_z": frac_str(mean_probs[i]),
            "poisson_pmf": ref.pmf(i),
            "abs_err": abs(float(mean_probs[i]) - ref.pmf(i)),
        }
        for i in support
    ]
    report = _report_skeleton(
        "mc-annealed",
        {
            "b": b,
            "k": k,
            "S": str(S),
            "S_measure": frac_str(measure),
            "replicates": R,
            "master_seed": master,
            "mem_cap": mem_cap,
        },
    )
    report["results"] = {
        "tv_to_poisson": tv,
        "janson_bound": jb.final,
        "janson_bound_with_rate_factor": jb.shell,
        "sampling_band": band,
        "within_bound_plus_band": tv <= jb.final + band,
        "mean_count": frac_str(mean_count),
        "mean_count_gap": abs(float(mean_count - measure)),
        "rows": rows,
    }
    _write_json(out_dir / "mc-annealed.json", report)
    _write_csv(
        out_dir / "mc-annealed.csv",
        ["i", "mean_z", "poisson_pmf", "abs_err"],
        [[r["i"], r["mean_z"], repr(r["poisson_pmf"]), repr(r["abs_err"])] for r in rows],
    )
    return report


def cmd_mc_quenched(settings: Settings, out_dir: Path) -> dict:
    b, k, R, master, S, threads, seeds = _mc_common(settings)
    mem_cap = settings.get("mem_cap", int, 1 << 28)
    i_list = [int(v) for v in str(settings.get("i_list", default="0,1,2,3,4,5,6,7,8")).split(",")]
    positions = positions_from_interval_union(S, b, k)
    bk = b**k

    def one(r: int) -> dict[int, Fraction]:
        src = iid_uniform_source(Alphabet(b), seeds[r])
        coc = counts_of_counts(count_blocks(src, b, k, positions, mem_cap_cells=mem_cap))
        return {i: coc.probability(i) for i in i_list}

    laws = _run_replicates(one, R, threads)
    qp = quenched_parameters(S.measure, S.n, b, k)
    bound = mcdiarmid_bound(qp.N, float(qp.c), float(qp.t))
    band = 3.0 * math.sqrt(bound / R)
    t = Fraction(1, k)
    rows = []
    for i in i_list:
        values = [law[i] for law in laws]
        mean = sum(values, Fraction(0)) / R
        violations = sum(1 for v in values if abs(v - mean) > t)
        fraction = Fraction(violations, R)
        rows.append(
            {
                "i": i,
                "mean_z": frac_str(mean),
                "violation_fraction": frac_str(fraction),
                "mcdiarmid_bound": bound,
                "band": band,
                "within_bound_plus_band": float(fraction) <= bound + band,
            }
        )
    report = _report_skeleton(
        "mc-quenched",
        {
            "b": b,
            "k": k,
            "S": str(S),
            "S_measure": frac_str(S.measure),
            "replicates": R,
            "master_seed": master,
            "i_list": i_list,
            "mem_cap": mem_cap,
            "deviation_threshold": frac_str(t),
        },
    )
    report["results"] = {
        "mcdiarmid_N": qp.N,
        "mcdiarmid_c": frac_str(qp.c),
        "mcdiarmid_t": frac_str(qp.t),
        "mcdiarmid_bound": bound,
        "sampling_band": band,
        "rows": rows,
    }
    _write_json(out_dir / "mc-quenched.json", report)
    _write_csv(
        out_dir / "mc-quenched.csv",
        ["i", "mean_z", "violation_fraction", "mcdiarmid_bound", "band"],
        [
            [r["i"], r["mean_z"], r["violation_fraction"], repr(r["mcdiarmid_bound"]), repr(r["band"])]
            for r in rows
        ],
    )
    return report


# ---------------------------------------------------------------------------
# bounds table
# ---------------------------------------------------------------------------

def cmd_bounds(settings: Settings, out_dir: Path) -> dict:
    b = settings.require("b", int)
    ks = _parse_k_values(settings.get("k", int), settings.get("k_range"))
    lambdas = _parse_lambdas(settings.get("lambdas", default="1"))
    S = IntervalUnion.parse(settings.get("S", default="(0,1]"))
    measure, n = S.measure, S.n
    rows = []
    for k in ks:
        jb = janson_tv_bound(measure, n, b, k)
        rows.append(["janson", b, k, "", n, frac_str(measure), repr(jb.final), ""])
        rows.append(
            ["janson-with-rate-factor", b, k, "", n, frac_str(measure), repr(jb.shell), ""]
        )
        qp = quenched_parameters(measure, n, b, k)
        mb = mcdiarmid_bound(qp.N, float(qp.c), float(qp.t))
        rows.append(
            ["mcdiarmid", b, k, "", n, frac_str(measure), repr(mb), f"N={qp.N};c={frac_str(qp.c)};t={frac_str(qp.t)}"]
        )
        ok = o_k_measure_bound(b, k)
        ok_flags = ";".join(
            f for f in ("asserted" if ok.asserted else "below-k24", "underflow" if ok.underflow else "")
            if f
        )
        rows.append(["o_k-measure", b, k, "", "", "", repr(ok.value), ok_flags])
        for lam in lambdas:
            ab = annealed_tv_bound(lam, b, k)
            ab_flags = "below-1/k" if ab.below_one_over_k else "above-1/k"
            rows.append(["annealed-tv", b, k, frac_str(lam), "", "", repr(ab.value), ab_flags])
            tb = tail_bound(b, lam, k)
            tb_flags = ";".join(
                f
                for f in (
                    f"k0={tb.k0}",
                    "asserted" if tb.asserted else "not-asserted-below-k0",
                    "underflow" if tb.underflow else "",
                )
                if f
            )
            rows.append(["tail", b, k, frac_str(lam), "", "", repr(tb.value), tb_flags])
    header = ["name", "b", "k", "lambda", "n", "S_measure", "value", "flags"]
    _write_csv(out_dir / "bounds.csv", header, rows)
    report = _report_skeleton(
        "bounds",
        {
            "b": b,
            "k_values": ks,
            "lambdas": [frac_str(l) for l in lambdas],
            "S": str(S),
        },
    )
    report["results"] = [dict(zip(header, row)) for row in rows]
    _write_json(out_dir / "bounds.json", report)
    return report


# ---------------------------------------------------------------------------
# mltest
# ---------------------------------------------------------------------------

def _witnesses_json(witnesses) -> list[dict]:
    return [
        {"lambda": frac_str(w.lam), "i": w.i, "deviation": w.deviation}
        for w in witnesses
    ]


def cmd_mltest(settings: Settings, out_dir: Path) -> dict:
    b = settings.require("b", int)
    ks = _parse_k_values(settings.get("k", int), settings.get("k_range"))
    max_prefix = settings.get("max_prefix", int, DEFAULT_MAX_PREFIX)
    config = MltestConfig(max_prefix=max_prefix)
    source = build_source(settings, b)
    m = settings.get("m", int)
    results = []
    if m is not None:
        rep = t_m_report(source, b, m, max(ks), config=config)
        for row in rep.rows:
            results.append(
                {"k": row.k, "member": row.member, "witnesses": _witnesses_json(row.witnesses)}
            )
        extra = {"m": m, "k0": rep.k0, "verdict": rep.verdict, "partial": True}
    else:
        for k in ks:
            res = o_k_membership(source, b, k, config)
            results.append(
                {"k": res.k, "member": res.member, "witnesses": _witnesses_json(res.witnesses)}
            )
        extra = {}
    report = _report_skeleton(
        "mltest",
        {
            "source": source.id,
            "b": b,
            "k_values": ks,
            "max_prefix": max_prefix,
            **extra,
        },
    )
    report["results"] = results
    _write_json(out_dir / "mltest.json", report)
    return report


# ---------------------------------------------------------------------------
# synth
# ---------------------------------------------------------------------------

def cmd_synth(settings: Settings, out_dir: Path) -> dict:
    b = settings.require("b", int)
    length = settings.require("length", int)
    window = str(settings.get("k_window", default="6:8"))
    lo, _, hi = window.partition(":")
    cfg = SynthConfig(b=b, k_lo=int(lo), k_hi=int(hi or lo))
    beam = settings.get("beam", int, 1)
    lookahead = settings.get("lookahead", int, 1)
    state = greedy_extend(new_state(cfg), length, beam_width=beam, lookahead=lookahead)
    out_file = settings.get("out")
    fmt = settings.get("format", default=ASCII_FORMAT)
    written = None
    if out_file:
        path = Path(out_file)
        if fmt == ASCII_FORMAT:
            write_ascii(path, b, state.prefix_array())
        elif fmt == PACKED_FORMAT:
            write_packed(path, b, state.prefix_array())
        else:
            raise UsageError(f"unknown output format {fmt!r}")
        written = str(path)
    score_rows = [
        {
            "k": r.k,
            "lambda": frac_str(r.lam),
            "status": r.status,
            "sup_deviation": r.sup_deviation,
            "penalty": r.penalty,
        }
        for r in score_prefix(
            state.prefix_array(), b, list(range(cfg.k_lo, cfg.k_hi + 1)), cfg.lambda_grid
        )
    ]
    report = _report_skeleton(
        "synth",
        {
            "b": b,
            "length": length,
            "k_window": f"{cfg.k_lo}:{cfg.k_hi}",
            "beam": beam,
            "lookahead": lookahead,
            "lambda_grid": [frac_str(l) for l in cfg.lambda_grid],
            "i_cap": cfg.i_cap,
            "format": fmt,
        },
    )
    report["results"] = {
        "penalty": state.penalty(),
        "output_file": written,
        "scores": score_rows,
    }
    _write_json(out_dir / "synth.json", report)
    return report


# ---------------------------------------------------------------------------
# selftest
# ---------------------------------------------------------------------------

def _naive_histogram(x, b: int, k: int, positions) -> dict[int, int]:
    out: dict[int, int] = {}
    for j in positions.indices():
        code = 0
        for t in range(k):
            code = code * b + int(x[j - 1 + t])
        out[code] = out.get(code, 0) + 1
    return out


def cmd_selftest(settings: Settings, out_dir: Path) -> dict:
    import random

    checks: list[tuple[str, bool]] = []
    rng = random.Random(20240901)
    ok = True
    for _ in range(50):
        b = rng.choice([2, 3, 4])
        k = rng.randint(1, 6)
        n = rng.randint(k, 512)
        x = [rng.randrange(b) for _ in range(n)]
        hi = rng.randint(1, n - k + 1)
        positions = PositionSet.prefix(hi)
        h = count_blocks(x, b, k, positions)
        ok = ok and dict(h.items()) == _naive_histogram(x, b, k, positions)
    checks.append(("counting engine vs naive oracle (50 cases)", ok))

    from .mltest import enumerate_L_k

    ok = True
    for k in range(1, 11):
        brute = sorted({Fraction(p, q) for q in range(1, k + 1) for p in range(1, k * q)})
        ok = ok and brute == enumerate_L_k(k)
    checks.append(("rate grid vs brute force (k <= 10)", ok))

    checks.append(("mcdiarmid at t=0 equals 2", mcdiarmid_bound(10, 0.5, 0.0) == 2.0))
    checks.append(("k0 threshold at rate 1 is 24", tail_bound(2, 1, 24).k0 == 24))

    src = iid_uniform_source(Alphabet(2), 7)
    a = src.prefix(4096)
    b_arr = src.prefix(4096)
    checks.append(("seeded source restart determinism", bool((a == b_arr).all())))

    for name, passed in checks:
        print(f"{'PASS' if passed else 'FAIL'}  {name}")
    report = _report_skeleton("selftest", {})
    report["results"] = [{"check": name, "pass": passed} for name, passed in checks]
    _write_json(out_dir / "selftest.json", report)
    if not all(p for _, p in checks):
        raise PgenError("selftest failed")
    return report


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

def _add_source_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--source", choices=SOURCE_FAMILIES, default=None)
    p.add_argument("--seed", type=int, default=None, help="seed for the iid source")
    p.add_argument("--file", default=None, help="path for the file source")
    p.add_argument("--format", default=None, choices=[ASCII_FORMAT, PACKED_FORMAT])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pgen",
        description="block-occurrence statistics, Poisson comparisons, bounds, "
        "deviation test sets, and Monte Carlo experiments for symbol sequences",
    )
    parser.add_argument("--config", default=None, help="key=value config file")
    parser.add_argument("--out-dir", dest="out_dir", default=None)
    parser.add_argument("--threads", type=int, default=None)
    parser.add_argument("--mem-cap", dest="mem_cap", type=int, default=None,
                        help="dense histogram cell cap")
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("analyze", "sweep"):
        p = sub.add_parser(name)
        _add_source_flags(p)
        p.add_argument("--b", type=int, default=None)
        p.add_argument("--k", type=int, default=None)
        p.add_argument("--k-range", dest="k_range", default=None, help="lo:hi inclusive")
        p.add_argument("--lambdas", default=None, help="comma list of rationals p/q")
        p.add_argument("--max-prefix", dest="max_prefix", type=int, default=None)

    for name in ("mc-annealed", "mc-quenched"):
        p = sub.add_parser(name)
        p.add_argument("--b", type=int, default=None)
        p.add_argument("--k", type=int, default=None)
        p.add_argument("--S", default=None, help="interval union like (0,1]+(3/2,2]")
        p.add_argument("--replicates", "--R", dest="replicates", type=int, default=None)
        p.add_argument("--master-seed", dest="master_seed", type=int, default=None)
        if name == "mc-quenched":
            p.add_argument("--i-list", dest="i_list", default=None)

    p = sub.add_parser("bounds")
    p.add_argument("--b", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--k-range", dest="k_range", default=None)
    p.add_argument("--lambdas", default=None)
    p.add_argument("--S", default=None)

    p = sub.add_parser("mltest")
    _add_source_flags(p)
    p.add_argument("--b", type=int, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--k-range", dest="k_range", default=None)
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--max-prefix", dest="max_prefix", type=int, default=None)

    p = sub.add_parser("synth")
    p.add_argument("--b", type=int, default=None)
    p.add_argument("--len", dest="length", type=int, default=None)
    p.add_argument("--k-window", dest="k_window", default=None, help="lo:hi")
    p.add_argument("--beam", type=int, default=None)
    p.add_argument("--lookahead", type=int, default=None)
    p.add_argument("--out", default=None)
    p.add_argument("--format", default=None, choices=[ASCII_FORMAT, PACKED_FORMAT])

    sub.add_parser("selftest")
    return parser


_COMMANDS = {
    "analyze": lambda s, d: cmd_analyze(s, d, "analyze"),
    "sweep": lambda s, d: cmd_analyze(s, d, "sweep"),
    "mc-annealed": cmd_mc_annealed,
    "mc-quenched": cmd_mc_quenched,
    "bounds": cmd_bounds,
    "mltest": cmd_mltest,
    "synth": cmd_synth,
    "selftest": cmd_selftest,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        file_cfg = load_config_file(args.config) if args.config else {}
        settings = Settings(args, file_cfg)
        out_dir = Path(settings.get("out_dir", str, "pgen-out"))
        out_dir.mkdir(parents=True, exist_ok=True)
        started = time.perf_counter()
        _COMMANDS[args.command](settings, out_dir)
        elapsed = time.perf_counter() - started
        print(f"{args.command}: reports written to {out_dir} "
              f"(wall clock {elapsed:.3f}s)")
        return 0
    except PgenError as exc:
        print(f"pgen {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
