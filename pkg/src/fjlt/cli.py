"""Command-line front end: dataset generation, embedding, timing, verification.

Subcommands: gen, pad, embed, bench, verify {rip, ealpha, distort, cross, conc}.
Every report echoes its full configuration (including all seeds) in the
header, so any row can be reproduced by re-running with the echoed arguments;
timing appears only in bench output.
"""

import argparse
import math
import sys
import time

import numpy as np

from fjlt import dataset as ds
from fjlt import hadamard
from fjlt.decomposition import split_heavy_light
from fjlt.estimators import (
    concentration_check,
    cross_term_stats,
    distortion_stats,
    estimate_e_alpha,
    rip_constant_bruteforce,
)
from fjlt.hadamard import RowIndexSet, fwht_in_place, is_power_of_two
from fjlt.reports import write_report
from fjlt.transform import TransformParams, sample_transform, target_dimension


def _echo_argv(argv: list[str]) -> str:
    """The command line without --out, for the reproducibility header."""
    out = []
    skip = False
    for a in argv:
        if skip:
            skip = False
            continue
        if a == "--out":
            skip = True
            continue
        if a.startswith("--out="):
            continue
        out.append(a)
    return " ".join(out)


def _read_any(path: str) -> np.ndarray:
    if path.endswith(".csv"):
        return ds.read_dataset_csv(path)
    return ds.read_dataset(path)


def _write_any(path: str, data: np.ndarray, fmt: str) -> None:
    if fmt == "csv":
        ds.write_dataset_csv(path, data)
    else:
        ds.write_dataset(path, data)


def _int_list(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fjlt", description=__doc__)
    p.add_argument("--seed", type=int, default=0, help="base seed for all randomness")
    p.add_argument("--threads", type=int, default=1, help="worker hint (recorded; results are thread-count independent)")
    p.add_argument("--out", required=False, help="output path")
    p.add_argument("--format", choices=("bin", "csv"), default="bin", help="dataset output format")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a dataset")
    g.add_argument("--kind", required=True, help="unit-sphere | sparse(r) | clustered | near-duplicate")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--count", type=int, required=True)
    g.add_argument("--sparsity", type=int, default=None)

    pp = sub.add_parser("pad", help="zero-pad a dataset to the next power-of-2 dimension")
    pp.add_argument("dataset")

    e = sub.add_parser("embed", help="apply a fresh transform to a dataset")
    e.add_argument("dataset")
    e.add_argument("--k", type=int, default=None, help="explicit target dimension")
    e.add_argument("--delta", type=float, default=None, help="distortion for the k formula")
    e.add_argument("--c-k", type=float, default=1.0)
    e.add_argument("--mode", choices=("with_replacement", "without_replacement"), default="with_replacement")

    b = sub.add_parser("bench", help="time the butterfly kernels against a dense baseline")
    b.add_argument("--n-list", type=_int_list, default=[2**14, 2**15, 2**16, 2**17, 2**18])
    b.add_argument("--k-frac", type=float, default=0.25, help="k as a fraction of n for the dense baseline")
    b.add_argument("--repeats", type=int, default=5)

    v = sub.add_parser("verify", help="run an estimator experiment")
    vs = v.add_subparsers(dest="check", required=True)

    vr = vs.add_parser("rip")
    vr.add_argument("--n", type=int, required=True)
    vr.add_argument("--k", type=int, required=True)
    vr.add_argument("--r", type=int, required=True)
    vr.add_argument("--budget", type=int, default=1000)
    vr.add_argument("--phi-seeds", type=int, default=1, help="number of row samples, seeds seed..seed+count-1")
    vr.add_argument("--full-selection", action="store_true", help="rows 0..n-1 instead of sampling (identity check)")

    ve = vs.add_parser("ealpha")
    ve.add_argument("--n", type=int, required=True)
    ve.add_argument("--k", type=int, required=True)
    ve.add_argument("--alpha", type=float, default=None)
    ve.add_argument("--r", type=int, default=None, help="sets alpha = 1/sqrt(r)")
    ve.add_argument("--samples", type=int, default=64)
    ve.add_argument("--ascent-iters", type=int, default=8)
    ve.add_argument("--phi-seeds", type=int, default=1)

    vd = vs.add_parser("distort")
    vd.add_argument("--dataset", required=True)
    vd.add_argument("--k", type=int, required=True)
    vd.add_argument("--delta", type=float, required=True)
    vd.add_argument("--pairs", type=int, default=None, help="measure this many sampled pairwise differences instead of single vectors")

    vc = vs.add_parser("cross")
    vc.add_argument("--n", type=int, required=True)
    vc.add_argument("--k", type=int, required=True)
    vc.add_argument("--r", type=int, required=True)
    vc.add_argument("--trials", type=int, default=10000)
    vc.add_argument("--num-vectors", type=int, default=5)

    vn = vs.add_parser("conc")
    vn.add_argument("--n", type=int, required=True)
    vn.add_argument("--k", type=int, required=True)
    vn.add_argument("--r", type=int, required=True)
    vn.add_argument("--trials", type=int, default=10000)
    vn.add_argument("--num-vectors", type=int, default=5)

    return p


def _require_out(args) -> str:
    if not args.out:
        raise ValueError("this command needs --out")
    return args.out


def cmd_gen(args) -> int:
    data = ds.generate_dataset(args.kind, args.n, args.count, args.seed, args.sparsity)
    out = _require_out(args)
    _write_any(out, data, args.format)
    ds.write_meta(out + ".meta", {
        "kind": args.kind, "n": args.n, "count": args.count, "seed": args.seed,
    })
    return 0


def cmd_pad(args) -> int:
    data = _read_any(args.dataset)
    padded, original_n = ds.pad_dataset(data)
    out = _require_out(args)
    _write_any(out, padded, args.format)
    ds.write_meta(out + ".meta", {"original_n": original_n, "n": padded.shape[1]})
    return 0


def cmd_embed(args) -> int:
    data = _read_any(args.dataset)
    count, n = data.shape
    if not is_power_of_two(n):
        raise ValueError(f"dataset dimension {n} is not a power of 2; run `fjlt pad` first")
    clamped = False
    if args.k is not None:
        k = args.k
    elif args.delta is not None:
        params = TransformParams(n=n, num_points=max(count, 2), delta=args.delta, c_k=args.c_k)
        k, clamped = target_dimension(params)
    else:
        raise ValueError("embed needs --k or --delta")
    t = sample_transform(n, k, args.seed, mode=args.mode)
    emb = t.apply_matrix(data)
    out = _require_out(args)
    _write_any(out, emb, args.format)
    meta = {
        "n": n, "k": k, "seed": args.seed, "c_k": args.c_k,
        "clamped": clamped, "mode": args.mode,
    }
    nonzero = np.einsum("ij,ij->i", data, data) > 0
    if nonzero.any():
        report = distortion_stats(t, data[nonzero], delta=0.5)
        meta["distortion_max_abs_dev"] = repr(max(abs(report.max - 1.0), abs(report.min - 1.0)))
        print(f"embed: n={n} k={k} max|ratio-1|={meta['distortion_max_abs_dev']}", file=sys.stderr)
    ds.write_meta(out + ".meta", meta)
    return 0


def _median_time(fn, repeats: int) -> float:
    fn()  # warm-up, excluded
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    times.sort()
    return times[len(times) // 2]


def _dense_matvec_time(n: int, k: int, repeats: int, rng) -> float:
    # Time the k x n dense multiply without holding the full matrix: apply a
    # representative row block repeatedly. Measures the multiply work only.
    block = min(k, max(1, (1 << 22) // n))
    m = rng.standard_normal((block, n))
    x = rng.standard_normal(n)
    nblocks = math.ceil(k / block)

    def run():
        for _ in range(nblocks):
            m @ x

    return _median_time(run, repeats)


def cmd_bench(args, argv) -> int:
    from fjlt import _fwht_py

    rng = np.random.Generator(np.random.PCG64(args.seed))
    rows = []
    for n in args.n_list:
        if not is_power_of_two(n):
            raise ValueError(f"bench n={n} is not a power of 2")
        k = max(1, int(round(args.k_frac * n)))
        x = rng.standard_normal(n)
        buf = np.empty_like(x)

        def run_active():
            np.copyto(buf, x)
            fwht_in_place(buf)

        def run_py():
            np.copyto(buf, x)
            _fwht_py.fwht(buf)

        active_s = _median_time(run_active, args.repeats)
        py_s = _median_time(run_py, args.repeats)
        dense_s = _dense_matvec_time(n, k, args.repeats, rng)
        rows.append((n, k, hadamard.KERNEL, active_s, py_s, dense_s, dense_s / active_s))

    out = _require_out(args)
    write_report(
        out,
        {"argv": _echo_argv(argv), "kernel": hadamard.KERNEL, "repeats": args.repeats},
        ["n", "k", "kernel", "fwht_s", "fwht_py_s", "dense_matvec_s", "speedup_vs_dense"],
        rows,
    )
    return 0


def _phi_for(n: int, k: int, seed: int, full_selection: bool = False) -> RowIndexSet:
    if full_selection:
        if k != n:
            raise ValueError("--full-selection requires k == n")
        return RowIndexSet(np.arange(n, dtype=np.int64), n)
    return sample_transform(n, k, seed).rows


def cmd_verify(args, argv) -> int:
    out = _require_out(args)
    config = {"argv": _echo_argv(argv), "seed": args.seed, "threads": args.threads}

    if args.check == "rip":
        rows = []
        for i in range(args.phi_seeds):
            seed = args.seed + i
            phi = _phi_for(args.n, args.k, seed, args.full_selection)
            rep = rip_constant_bruteforce(phi, args.k, args.r, args.budget, seed=seed)
            rows.append((seed, rep.r, args.k, rep.delta_hat, rep.supports_checked,
                         rep.exhaustive, rep.witness_support))
        config.update(n=args.n, k=args.k, r=args.r, budget=args.budget)
        write_report(out, config,
                     ["phi_seed", "r", "k", "delta_hat", "supports_checked",
                      "exhaustive", "witness_support"], rows)
        return 0

    if args.check == "ealpha":
        if (args.alpha is None) == (args.r is None):
            raise ValueError("ealpha needs exactly one of --alpha / --r")
        alpha = args.alpha if args.alpha is not None else 1.0 / math.sqrt(args.r)
        rows = []
        for i in range(args.phi_seeds):
            seed = args.seed + i
            phi = _phi_for(args.n, args.k, seed)
            est = estimate_e_alpha(phi, args.k, alpha, args.samples,
                                   args.ascent_iters, seed=seed)
            rows.append((seed, est.alpha, est.lower_bound, est.samples, est.ascent_iters))
        config.update(n=args.n, k=args.k, alpha=alpha, samples=args.samples,
                      ascent_iters=args.ascent_iters,
                      mean_lower_bound=float(np.mean([r[2] for r in rows])))
        write_report(out, config,
                     ["phi_seed", "alpha", "lower_bound", "samples", "ascent_iters"], rows)
        return 0

    if args.check == "distort":
        data = _read_any(args.dataset)
        count, n = data.shape
        if args.pairs is not None:
            rng = np.random.Generator(np.random.PCG64(args.seed))
            ii = rng.integers(0, count, size=args.pairs)
            jj = rng.integers(0, count, size=args.pairs)
            data = data[ii] - data[jj]
        t = sample_transform(n, args.k, args.seed)
        rep = distortion_stats(t, data, args.delta)
        max_abs = max(abs(rep.max - 1.0), abs(rep.min - 1.0))
        config.update(n=n, k=args.k, delta=args.delta, count=len(rep.ratios),
                      pairs=args.pairs, skipped=len(rep.skipped))
        write_report(out, config,
                     ["min_ratio", "max_ratio", "mean_ratio", "success_fraction", "max_abs_dev"],
                     [(rep.min, rep.max, rep.mean, rep.success_fraction, max_abs)])
        return 0

    if args.check == "cross":
        rows = []
        for i in range(args.num_vectors):
            vec_seed = args.seed + 1000 + i
            rng = np.random.Generator(np.random.PCG64(vec_seed))
            y = rng.standard_normal(args.n)
            y /= np.linalg.norm(y)
            split = split_heavy_light(y, args.r)
            phi = _phi_for(args.n, args.k, args.seed + i)
            st = cross_term_stats(phi, args.k, split, args.trials, seed=vec_seed)
            zscore = abs(st.mean) * math.sqrt(st.trials) / st.std if st.std > 0 else 0.0
            rows.append((i, st.mean, st.std, st.trials, zscore))
        config.update(n=args.n, k=args.k, r=args.r, trials=args.trials)
        write_report(out, config,
                     ["vector", "mean", "std", "trials", "abs_mean_over_stderr"], rows)
        return 0

    if args.check == "conc":
        rows = []
        for i in range(args.num_vectors):
            vec_seed = args.seed + 2000 + i
            rng = np.random.Generator(np.random.PCG64(vec_seed))
            y = rng.standard_normal(args.n)
            y /= np.linalg.norm(y)
            split = split_heavy_light(y, args.r)
            phi = _phi_for(args.n, args.k, args.seed + i)
            rep = concentration_check(phi, args.k, split.light, args.trials, seed=vec_seed)
            rows.append((i, rep.median_hat, rep.rms_hat, rep.sigma_hat,
                         rep.normalized_gap) + rep.tail_freqs)
        config.update(n=args.n, k=args.k, r=args.r, trials=args.trials)
        write_report(out, config,
                     ["vector", "median", "rms", "sigma", "normalized_gap",
                      "tail_1sigma", "tail_2sigma", "tail_3sigma"], rows)
        return 0

    raise ValueError(f"unknown verify subcommand {args.check!r}")


def main(argv: list[str] | None = None) -> int:
    if argv is None:
        argv = sys.argv[1:]
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen":
            return cmd_gen(args)
        if args.command == "pad":
            return cmd_pad(args)
        if args.command == "embed":
            return cmd_embed(args)
        if args.command == "bench":
            return cmd_bench(args, argv)
        if args.command == "verify":
            return cmd_verify(args, argv)
    except (ValueError, OSError, MemoryError) as exc:
        print(f"fjlt: error: {exc}", file=sys.stderr)
        return 1
    return 2


if __name__ == "__main__":
    sys.exit(main())
