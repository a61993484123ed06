"""Command-line entry point: ``combregge <subcommand> ...``.

Primary output goes to stdout, or to files under ``--out``.  Every run
also emits a manifest: ``<out>/manifest.json`` with ``--out``, otherwise a
single JSON line on stderr.

Exit codes: 0 success, 2 input error, 3 domain error, 4 budget refusal.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .errors import BudgetError, DomainError

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_DOMAIN = 3
EXIT_BUDGET = 4


class InputError(ValueError):
    pass


def fmt(x) -> str:
    """12 significant digits; scientific notation below 1e-4."""
    x = float(x)
    if x == 0:
        return "0"
    return format(x, ".12g")


@dataclass
class RunManifest:
    subcommand: str
    config: dict
    seed: int
    version: str = __version__
    input_digests: dict[str, str] = field(default_factory=dict)
    outputs: list[str] = field(default_factory=list)
    started: str = ""
    elapsed_s: float = 0.0

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def _digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def _read(path, manifest: RunManifest) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror or exc}") from None
    manifest.input_digests[str(path)] = _digest(path)
    return text


class Output:
    """Collects named outputs; writes them under ``--out`` or to stdout."""

    def __init__(self, out_dir, manifest: RunManifest):
        self.out_dir = Path(out_dir) if out_dir else None
        self.manifest = manifest
        if self.out_dir:
            self.out_dir.mkdir(parents=True, exist_ok=True)

    def emit(self, name: str, text: str, stdout=True):
        if self.out_dir:
            path = self.out_dir / name
            path.write_text(text, encoding="utf-8")
            self.manifest.outputs.append(name)
        elif stdout:
            sys.stdout.write(text)

    def report(self, name: str, pairs):
        self.emit(name, "".join(f"{k} = {v}\n" for k, v in pairs))


def _parse_ells(text):
    try:
        ells = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise InputError(f"--ells must be a comma-separated list of numbers, got {text!r}") from None
    if not ells:
        raise InputError("--ells is empty")
    return ells


def _load_tri(path, manifest):
    from .triangulation import parse_gluing_text

    return parse_gluing_text(_read(path, manifest))


def cmd_analyze(args, out: Output):
    from .action import ActionParams, normalized_action, regge_action_equal_lengths
    from .triangulation import (
        homology_h1,
        is_simplicial,
        iso_signature,
        mean_bone_degree,
        skeleton,
        validate_manifold,
    )

    tri = _load_tri(args.input, out.manifest)
    skel = skeleton(tri)
    report = validate_manifold(tri, skel)
    if not report.valid:
        raise InputError("not a closed 3-manifold: " + "; ".join(report.reasons))
    p = ActionParams(ell=args.ell)
    mu = mean_bone_degree(tri, skel)
    simp = is_simplicial(tri, skel)
    out.report(
        "analyze.txt",
        [
            ("f_vector", " ".join(map(str, skel.fvector))),
            ("mu", str(mu.as_fraction())),
            ("mu_decimal", fmt(mu.numerator / mu.denominator)),
            ("mu_display", mu.display()),
            ("ell", fmt(args.ell)),
            ("action_raw", fmt(regge_action_equal_lengths(tri, p, skel).value)),
            ("action_normalized", fmt(normalized_action(tri, p, skel).value)),
            ("signature", iso_signature(tri)),
            ("valid", report.verdict),
            ("orientable", str(report.orientable).lower()),
            ("simplicial", str(simp.simplicial).lower()),
            ("h1", str(homology_h1(tri, skel))),
        ],
    )


FILTERS = ("none", "orientable", "simplicial", "s3")


def cmd_enumerate(args, out: Output):
    from .census import (
        S3_CONFIRMED,
        TRIVIAL_H1_UNRESOLVED,
        CensusLadder,
        EnumerationFilters,
        classify_manifold,
        enumerate_all,
        histogram,
        max_tets,
        write_gluing_archive,
    )

    k = args.tets
    if k < 1:
        raise InputError("--tets must be positive")
    cap = max_tets()
    if k > cap:
        raise BudgetError(
            f"K={k} exceeds the enumeration cap {cap}; K=6 takes about ten minutes and each extra "
            f"tetrahedron costs roughly ten times more. Set REGGE_MAX_TETS to raise the cap."
        )
    if args.filter == "s3":
        ladder = CensusLadder(seed=args.seed, orientable_only=True, workers=args.threads)
        tris, classes = ladder.level(k)
        keep = [i for i, c in enumerate(classes) if c.label in (S3_CONFIRMED, TRIVIAL_H1_UNRESOLVED)]
        tris, classes = [tris[i] for i in keep], [classes[i] for i in keep]
        filters = "orientable+s3"
    else:
        flt = EnumerationFilters(
            orientable_only=args.filter == "orientable", simplicial_only=args.filter == "simplicial"
        )
        tris = enumerate_all(k, flt, workers=args.threads)
        classes = [classify_manifold(t, args.seed) for t in tris] if args.classify else None
        filters = flt.describe()
    hist = histogram(tris, classes, filters=filters)
    if out.out_dir:
        name = f"census_k{k}.txt"
        write_gluing_archive(tris, out.out_dir / name)
        out.manifest.outputs.append(name)
    out.emit(f"histogram_k{k}.csv", hist.to_csv())


def cmd_histogram(args, out: Output):
    from .census import parse_histogram_csv, s3_ratio
    from .ensemble import almost_flat_bracket

    hist = parse_histogram_csv(_read(args.input, out.manifest))
    vols = [args.tets] if args.tets else hist.volumes()
    lines = ["K,N1,mu,mu_display,count"]
    ratios = []
    for k in vols:
        for mu, disp, c in hist.display_rows(k, args.cls):
            n1 = int(mu.split("/")[1])
            lines.append(f"{k},{n1},{mu},{disp},{c}")
        try:
            b = almost_flat_bracket(k)
            ratio, info = s3_ratio(hist, k, b.n1_minus, b.n1_plus, cls=args.cls)
        except (DomainError, ValueError):
            continue
        unresolved = sum(info["unresolved"].values())
        ratios.append(f"# ratio K={k} N1-={b.n1_minus} N1+={b.n1_plus} minus={info['minus']} "
                      f"plus={info['plus']} value={ratio:.3f} unresolved={unresolved}")
    out.emit("histogram.txt", "\n".join(lines + ratios) + "\n")


def cmd_bracket(args, out: Output):
    from .action import ActionParams
    from .ensemble import almost_flat_bracket

    b = almost_flat_bracket(args.tets, ActionParams(ell=args.ell))
    out.report(
        "bracket.txt",
        [
            ("tets", b.tets),
            ("ell", fmt(b.ell)),
            ("n1_minus", b.n1_minus),
            ("n1_plus", b.n1_plus),
            ("mu_minus", str(b.mu_minus.as_fraction())),
            ("mu_plus", str(b.mu_plus.as_fraction())),
            ("mu_minus_display", b.mu_minus.display()),
            ("mu_plus_display", b.mu_plus.display()),
            ("a_minus", fmt(b.a_minus)),
            ("a_plus", fmt(b.a_plus)),
            ("delta_a", fmt(b.delta_a)),
            ("gap_times_ell2_k", fmt(b.delta_a * b.ell**2 * b.tets)),
            ("guaranteed", str(b.guaranteed).lower()),
        ],
    )


def cmd_lambda(args, out: Output):
    from .ensemble import CosmologyInputs, lambda_estimate

    report = lambda_estimate(CosmologyInputs(args.ell_m, args.vol_m3, args.ratio, args.mode))
    out.emit("lambda.txt", "\n".join(report.lines(fmt)) + "\n")


def cmd_sample(args, out: Output):
    from .sampler import SamplerConfig, run_chain
    from .triangulation import boundary_of_4_simplex, validate_manifold

    if args.start:
        start = _load_tri(args.start, out.manifest)
        if not validate_manifold(start).valid:
            raise InputError("start triangulation is not a closed 3-manifold")
    else:
        start = boundary_of_4_simplex()
    try:
        cfg = SamplerConfig(
            target=args.tets,
            seed=args.seed,
            delta=args.delta,
            lambda_pin=args.lambda_pin,
            mode=args.mode,
            ell=args.ell,
            kinds=tuple(args.kinds.split(",")),
            steps=args.steps,
            burn_in=args.burn_in,
            thin=args.thin,
            chains=args.chains,
            observe=args.observe,
            debug=args.debug,
        )
    except ValueError as exc:
        raise InputError(str(exc)) from None
    stats = run_chain(start, cfg, workers=args.threads)
    out.emit("visits.csv", stats.to_csv(), stdout=False)
    out.emit("summary.json", stats.summary_json() + "\n")


def cmd_probe(args, out: Output):
    from .census import parse_histogram_csv
    from .ensemble import divergence_probe

    hist = parse_histogram_csv(_read(args.input, out.manifest))
    result = divergence_probe(hist, args.tets, _parse_ells(args.ells), args.mode, args.cls)
    lines = ["ell,abs_z,log_abs_z"]
    lines += [f"{fmt(r.ell)},{fmt(r.value)},{fmt(r.log_value)}" for r in result.rows]
    lines.append(f"# strictly_increasing = {str(result.strictly_increasing).lower()}")
    lines.append(f"# negative_level = {str(result.negative_level).lower()}")
    if result.bound is not None:
        lines.append(f"# bound = {fmt(result.bound)}")
    lines.append(f"# verdict = {result.verdict}")
    out.emit("probe.txt", "\n".join(lines) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="combregge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    parser.add_argument("--threads", type=int, default=1, help="worker processes (default 1)")
    parser.add_argument("--out", help="directory for output files and manifest.json")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("analyze", help="report invariants of a gluing file")
    p.add_argument("input")
    p.add_argument("--ell", type=float, default=1.0)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("enumerate", help="exhaustive census at K tetrahedra")
    p.add_argument("--tets", type=int, required=True)
    p.add_argument("--filter", choices=FILTERS, default="none")
    p.add_argument("--classify", action="store_true", help="label entries by manifold class")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("histogram", help="mu table and N-/N+ ratio from a histogram CSV")
    p.add_argument("input")
    p.add_argument("--tets", type=int)
    p.add_argument("--class", dest="cls", default="S3-confirmed")
    p.set_defaults(func=cmd_histogram)

    p = sub.add_parser("bracket", help="almost scalar-flat levels at volume K")
    p.add_argument("--tets", type=int, required=True)
    p.add_argument("--ell", type=float, default=1.0)
    p.set_defaults(func=cmd_bracket)

    p = sub.add_parser("lambda", help="emergent cosmological constant estimate")
    p.add_argument("--ell-m", type=float, required=True)
    p.add_argument("--vol-m3", type=float, required=True)
    p.add_argument("--ratio", type=float)
    p.add_argument("--mode", choices=("quantum", "euclidean"), default="quantum")
    p.set_defaults(func=cmd_lambda)

    p = sub.add_parser("sample", help="Metropolis-Hastings walk around volume K")
    p.add_argument("--tets", type=int, required=True)
    p.add_argument("--start", help="gluing file of the starting triangulation (default: boundary of the 4-simplex)")
    p.add_argument("--delta", type=int, default=3)
    p.add_argument("--lambda-pin", type=float, default=0.5)
    p.add_argument("--mode", choices=("uniform", "euclidean"), default="uniform")
    p.add_argument("--ell", type=float, default=1.0)
    p.add_argument("--kinds", default="1-4,4-1,2-3,3-2")
    p.add_argument("--steps", type=int, default=1_000_000)
    p.add_argument("--burn-in", type=int)
    p.add_argument("--thin", type=int, default=10)
    p.add_argument("--chains", type=int, default=1)
    p.add_argument("--observe", type=int, help="volume slice where |Aut| is recorded (default: --tets)")
    p.add_argument("--debug", action="store_true", help="re-validate the manifold every 10^4 steps")
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("probe", help="euclidean |Z| along decreasing edge lengths")
    p.add_argument("input")
    p.add_argument("--tets", type=int, required=True)
    p.add_argument("--ells", default="1,0.5,0.25,0.125")
    p.add_argument("--mode", choices=("euclidean", "quantum"), default="euclidean")
    p.add_argument("--class", dest="cls", default="S3-confirmed")
    p.set_defaults(func=cmd_probe)
    return parser


def main(argv=None) -> int:
    from .census import HistogramFormatError
    from .triangulation import GluingError

    parser = build_parser()
    args = parser.parse_args(argv)
    config = {k: v for k, v in vars(args).items() if k != "func"}
    manifest = RunManifest(subcommand=args.subcommand, config=config, seed=args.seed)
    manifest.started = datetime.now(timezone.utc).isoformat(timespec="seconds")
    t0 = time.perf_counter()
    code = EXIT_OK
    try:
        if args.threads < 1:
            raise InputError("--threads must be positive")
        out = Output(args.out, manifest)
        args.func(args, out)
    except BudgetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_BUDGET
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_DOMAIN
    except (InputError, GluingError, HistogramFormatError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        code = EXIT_INPUT
    manifest.elapsed_s = round(time.perf_counter() - t0, 3)
    if args.out and code == EXIT_OK:
        (Path(args.out) / "manifest.json").write_text(manifest.to_json() + "\n", encoding="utf-8")
    else:
        print(manifest.to_json(), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
