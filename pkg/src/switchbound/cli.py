"""Command-line front end.

Subcommands: qc, measure, bound, overshoot, simulate, witness, sweep.
Family files are JSON (see core.parse_family); sweep consumes a generator
file holding a base, a perturbation, and a tau list. Output formats: text
(human), structured (canonical JSON, byte-stable for fixed seeds), csv.
Exit codes: 0 ok/affirmative, 2 reducible, 3 inconclusive/uncertified,
4 witness or probe precondition failure, 64 usage or parse error, 65
enumeration cap.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from ._version import __version__
from .core import (
    EnumerationCapError,
    FamilyFormatError,
    MatrixFamily,
    NormTag,
    load_family,
    product_levels,
)
from .desync import (
    UPDATE_LAWS,
    UpdateLaw,
    desync_overshoot_bound,
    desync_word,
    mixture_family,
    vertex_family,
)
from .dynamics import (
    WitnessPreconditionError,
    instability_witness,
    jsr_bounds,
    overshoot_bound,
    overshoot_bruteforce,
    simulate,
)
from .invariance import QCStatus, is_quasi_controllable, mixture_qc_criterion
from .measure import SearchConfig, quasi_controllability_measure
from .report import (
    ReportEnvelope,
    desync_bound_payload,
    family_digest,
    jsr_payload,
    keyvalue_csv,
    measure_payload,
    overshoot_payload,
    qc_payload,
    sweep_csv,
    sweep_payload,
    text_digest,
    trajectory_csv,
    trajectory_payload,
    witness_payload,
)
from .robustness import (
    ProbeInapplicableError,
    instability_robustness_probe,
    measure_sweep,
)

EXIT_OK = 0
EXIT_REDUCIBLE = 2
EXIT_INCONCLUSIVE = 3
EXIT_PRECONDITION = 4
EXIT_USAGE = 64
EXIT_CAP = 65


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _parse_vector(text: str) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",") if v.strip() != ""])
    except ValueError as exc:
        raise UsageError(f"bad vector {text!r}: {exc}") from exc


def _parse_word(text: str) -> tuple:
    if text.strip() == "":
        return ()
    try:
        return tuple(int(v) for v in text.split(","))
    except ValueError as exc:
        raise UsageError(f"bad word {text!r}: {exc}") from exc


def _parse_taus(text: str) -> list:
    try:
        return [float(v) for v in text.split(",") if v.strip() != ""]
    except ValueError as exc:
        raise UsageError(f"bad tau list {text!r}: {exc}") from exc


def _load_family(args) -> MatrixFamily:
    family = load_family(args.family)
    if getattr(args, "norm", None):
        family = MatrixFamily(
            members=family.members,
            norm=NormTag.parse(args.norm),
            labels=family.labels,
        )
    return family


def _single_matrix(family: MatrixFamily, what: str) -> np.ndarray:
    if family.size != 1:
        raise UsageError(
            f"{what} needs a file with exactly one matrix, got {family.size}"
        )
    return family.members[0]


def _search_config(args) -> SearchConfig:
    kwargs: dict = {}
    if getattr(args, "starts", None) is not None:
        kwargs["starts"] = args.starts
    if getattr(args, "seed", None) is not None:
        kwargs["seed"] = args.seed
    grid = getattr(args, "certify_grid", None)
    if grid is not None:
        if grid <= 0.0:
            kwargs["certify"] = False
        else:
            kwargs["mesh"] = grid
    return SearchConfig(**kwargs)


def _emit(args, envelope: ReportEnvelope, csv_text: str | None = None) -> None:
    fmt = getattr(args, "format", "text")
    if fmt == "structured":
        text = envelope.to_json()
    elif fmt == "csv":
        text = csv_text if csv_text is not None else keyvalue_csv(
            envelope.payload()["results"]
        )
    else:
        text = envelope.to_text()
    out = getattr(args, "out", None)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_qc(args) -> int:
    family = _load_family(args)
    verdict = is_quasi_controllable(family)
    envelope = ReportEnvelope(
        command="qc",
        digest=family_digest(family),
        parameters={"norm": family.norm.value, "members": family.size, "n": family.dim},
        results=qc_payload(verdict),
    )
    _emit(args, envelope)
    if verdict.status is QCStatus.QUASI_CONTROLLABLE:
        return EXIT_OK
    if verdict.status is QCStatus.REDUCIBLE:
        return EXIT_REDUCIBLE
    return EXIT_INCONCLUSIVE


def cmd_measure(args) -> int:
    family = _load_family(args)
    cfg = _search_config(args)
    rep = quasi_controllability_measure(family, p=args.p, config=cfg)
    envelope = ReportEnvelope(
        command="measure",
        digest=family_digest(family),
        parameters={
            "p": rep.p,
            "norm": family.norm.value,
            "starts": cfg.starts,
            "seed": cfg.seed,
            "mesh": cfg.mesh,
            "certify": cfg.certify,
        },
        results=measure_payload(rep),
        warnings=rep.warnings,
    )
    _emit(args, envelope)
    return EXIT_OK


def _comparison(chi: float, bound: float, conditional: bool) -> str:
    if chi <= bound * (1.0 + 1e-12):
        verdict = "PASS"
    else:
        verdict = "FAIL"
    if conditional and verdict == "PASS":
        verdict = "PASS (conditional on stability)"
    return f"chi_T <= bound: {verdict}"


def cmd_bound(args) -> int:
    if args.model in ("mixture", "vertex"):
        family_file = load_family(args.family)
        A = _single_matrix(family_file, f"--model {args.model}")
        rep = desync_overshoot_bound(A, model=args.model, jsr_depth=args.jsr_depth)
        results = desync_bound_payload(rep)
        warnings = []
        if rep.conditional:
            warnings.append(
                "stability not certified by jsr probe or weighted-norm "
                "certificate; bound is conditional"
            )
        family = mixture_family(A) if args.model == "mixture" else vertex_family(A)
        if args.depth is not None:
            brute = overshoot_bruteforce(family, args.depth)
            results["T"] = brute.T
            results["chi_T"] = brute.chi_T
            results["witness_word"] = list(brute.witness_word)
            results["comparison"] = _comparison(brute.chi_T, rep.bound, rep.conditional)
        envelope = ReportEnvelope(
            command="bound",
            digest=family_digest(family),
            parameters={
                "model": args.model,
                "jsr_depth": args.jsr_depth,
                "T": args.depth,
            },
            results=results,
            warnings=tuple(warnings),
        )
        _emit(args, envelope)
        if rep.structured.status is not QCStatus.QUASI_CONTROLLABLE:
            return EXIT_REDUCIBLE
        return EXIT_OK
    family = _load_family(args)
    cfg = _search_config(args)
    rep = overshoot_bound(family, p=args.p, config=cfg, jsr_depth=args.jsr_depth)
    results = overshoot_payload(rep)
    warnings = list(rep.sigma.warnings)
    if rep.conditional:
        warnings.append("stability not certified by jsr probe; bound is conditional")
    if args.depth is not None:
        brute = overshoot_bruteforce(family, args.depth)
        results["T"] = brute.T
        results["chi_T"] = brute.chi_T
        results["witness_word"] = list(brute.witness_word)
        results["comparison"] = _comparison(
            brute.chi_T, rep.apriori_bound, rep.conditional
        )
    envelope = ReportEnvelope(
        command="bound",
        digest=family_digest(family),
        parameters={
            "p": rep.sigma.p,
            "norm": family.norm.value,
            "starts": cfg.starts,
            "seed": cfg.seed,
            "mesh": cfg.mesh,
            "jsr_depth": args.jsr_depth,
            "T": args.depth,
        },
        results=results,
        warnings=tuple(warnings),
    )
    _emit(args, envelope)
    if rep.sigma.sigma_lower <= 0.0:
        return EXIT_INCONCLUSIVE
    return EXIT_OK


def cmd_overshoot(args) -> int:
    family = _load_family(args)
    brute = overshoot_bruteforce(family, args.depth)
    cfg = _search_config(args)
    bound_rep = overshoot_bound(family, p=args.p, config=cfg, jsr_depth=args.jsr_depth)
    results = overshoot_payload(brute)
    results["apriori_bound"] = bound_rep.apriori_bound
    results["conditional"] = bound_rep.conditional
    results["sigma"] = measure_payload(bound_rep.sigma)
    results["jsr"] = jsr_payload(bound_rep.jsr)
    results["comparison"] = _comparison(
        brute.chi_T, bound_rep.apriori_bound, bound_rep.conditional
    )
    warnings = list(bound_rep.sigma.warnings)
    if bound_rep.conditional:
        warnings.append("stability not certified by jsr probe; bound is conditional")
    envelope = ReportEnvelope(
        command="overshoot",
        digest=family_digest(family),
        parameters={
            "T": args.depth,
            "p": bound_rep.sigma.p,
            "norm": family.norm.value,
            "starts": cfg.starts,
            "seed": cfg.seed,
        },
        results=results,
        warnings=tuple(warnings),
    )
    _emit(args, envelope)
    if args.plot:
        from .plotting import plot_overshoot_profile

        levels = product_levels(family, args.depth)
        maxima = [1.0] + [
            max((nrm for _, nrm, _ in lev), default=1.0) for lev in levels
        ]
        plot_overshoot_profile(maxima, brute.chi_T, bound_rep.apriori_bound, args.plot)
    return EXIT_OK


def cmd_simulate(args) -> int:
    family = _load_family(args)
    if args.law is not None:
        A = _single_matrix(family, "--law")
        if args.model == "mixture":
            family = mixture_family(A, norm=family.norm)
        else:
            family = vertex_family(A, norm=family.norm)
        law = UpdateLaw(kind=args.law, seed=args.seed)
        x0 = _parse_vector(args.x0) if args.x0 else np.eye(family.dim)[0]
        word = desync_word(family, law, x0, args.steps)
    else:
        if args.word is None:
            raise UsageError("simulate needs either --word or --law")
        word = _parse_word(args.word)
        x0 = _parse_vector(args.x0) if args.x0 else np.eye(family.dim)[0]
    traj = simulate(family, word, x0)
    envelope = ReportEnvelope(
        command="simulate",
        digest=family_digest(family),
        parameters={
            "law": args.law,
            "model": args.model if args.law else None,
            "steps": len(word),
            "seed": args.seed,
            "x0": x0,
            "norm": family.norm.value,
        },
        results=trajectory_payload(traj),
    )
    _emit(args, envelope, csv_text=trajectory_csv(traj))
    if args.plot:
        from .plotting import plot_trajectory

        plot_trajectory(traj, args.plot)
    return EXIT_OK


def cmd_witness(args) -> int:
    family = _load_family(args)
    p = args.p if args.p is not None else max(family.dim - 1, 0)
    seed_x = _parse_vector(args.seed_x)
    seed_word = _parse_word(args.seed_word)
    x0 = _parse_vector(args.x0) if args.x0 else seed_x
    if args.sigma_lower is not None:
        sigma_lower = args.sigma_lower
    else:
        cfg = _search_config(args)
        rep = quasi_controllability_measure(family, p=p, config=cfg)
        sigma_lower = rep.sigma_lower
    if sigma_lower <= 0.0:
        raise WitnessPreconditionError(
            "no certified positive sigma_lower; pass --sigma-lower or use a "
            "quasi-controllable family"
        )
    witness = instability_witness(
        family,
        p,
        seed_x=seed_x,
        seed_R_word=seed_word,
        mu=args.mu,
        x0=x0,
        blocks=args.blocks,
        sigma_lower=sigma_lower,
    )
    envelope = ReportEnvelope(
        command="witness",
        digest=family_digest(family),
        parameters={
            "p": p,
            "mu": args.mu,
            "blocks": args.blocks,
            "seed_word": list(seed_word),
            "seed_x": seed_x,
            "sigma_lower": sigma_lower,
            "norm": family.norm.value,
        },
        results=witness_payload(witness),
    )
    _emit(args, envelope, csv_text=trajectory_csv(witness.trajectory))
    if args.plot:
        from .plotting import plot_witness

        plot_witness(witness, args.plot)
    return EXIT_OK


def _load_generator(path: str):
    try:
        with open(path) as fh:
            raw = fh.read()
        doc = json.loads(raw)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read generator file {path}: {exc}") from exc
    kind = doc.get("kind")
    norm = NormTag.parse(doc.get("norm", "l1"))
    taus = doc.get("taus", [])
    if kind == "mixture":
        base = np.asarray(doc["base"], dtype=float)
        pert = np.asarray(doc["perturbation"], dtype=float)
        if base.shape != pert.shape or base.ndim != 2:
            raise UsageError("mixture generator needs square base/perturbation")

        def generator(tau: float) -> MatrixFamily:
            return mixture_family(base + tau * pert, norm=norm)

        def criterion(tau: float):
            return mixture_qc_criterion(base + tau * pert)

        description = doc.get("description", "mixture generator")
        return generator, criterion, taus, description
    if kind == "direct":
        base = [np.asarray(M, dtype=float) for M in doc["base"]]
        pert = [np.asarray(M, dtype=float) for M in doc["perturbation"]]
        if len(base) != len(pert):
            raise UsageError("direct generator needs matching member counts")

        def generator(tau: float) -> MatrixFamily:
            return MatrixFamily(
                members=tuple(B + tau * P for B, P in zip(base, pert)), norm=norm
            )

        description = doc.get("description", "direct generator")
        return generator, None, taus, description
    raise UsageError(f"unknown generator kind {kind!r}; use 'mixture' or 'direct'")


def cmd_sweep(args) -> int:
    generator, criterion, file_taus, description = _load_generator(args.generator)
    taus = _parse_taus(args.taus) if args.taus else file_taus
    if not taus:
        raise UsageError("no taus given (flag --taus or generator file)")
    cfg = _search_config(args)
    p = args.p if args.p is not None else max(generator(0.0).dim - 1, 0)
    if args.probe:
        if args.depth is None:
            raise UsageError("--probe needs --depth/-T for the violating word search")
        table = instability_robustness_probe(
            generator, p, taus, T=args.depth, config=cfg, description=description
        )
    else:
        table = measure_sweep(
            generator,
            p,
            taus,
            config=cfg,
            T=args.depth,
            criterion=criterion,
            description=description,
        )
    with open(args.generator) as fh:
        digest = text_digest(fh.read())
    envelope = ReportEnvelope(
        command="sweep",
        digest=digest,
        parameters={
            "p": p,
            "T": args.depth,
            "taus": list(taus),
            "seed": cfg.seed,
            "probe": bool(args.probe),
        },
        results=sweep_payload(table),
    )
    _emit(args, envelope, csv_text=sweep_csv(table))
    if args.plot:
        from .plotting import plot_sweep

        plot_sweep(table, args.plot)
    return EXIT_OK


def _add_common(sub, plot: bool = False) -> None:
    sub.add_argument("--format", choices=("text", "structured", "csv"), default="text")
    sub.add_argument("--out", help="write the report to this file instead of stdout")
    if plot:
        sub.add_argument("--plot", help="also render a figure to this path")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="switchbound", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    subs = parser.add_subparsers(dest="command", required=True)

    qc = subs.add_parser("qc", help="quasi-controllability verdict")
    qc.add_argument("family")
    qc.add_argument("--norm", choices=("l1", "l2", "linf"))
    _add_common(qc)
    qc.set_defaults(func=cmd_qc)

    measure = subs.add_parser("measure", help="sigma_p with certified lower bound")
    measure.add_argument("family")
    measure.add_argument("--p", type=int)
    measure.add_argument("--norm", choices=("l1", "l2", "linf"))
    measure.add_argument("--starts", type=int)
    measure.add_argument("--seed", type=int)
    measure.add_argument(
        "--certify-grid",
        type=float,
        dest="certify_grid",
        help="finest certification cell radius; 0 disables certification",
    )
    _add_common(measure)
    measure.set_defaults(func=cmd_measure)

    bound = subs.add_parser("bound", help="a priori overshoot bound 1/sigma")
    bound.add_argument("family")
    bound.add_argument("--model", choices=("family", "mixture", "vertex"), default="family")
    bound.add_argument("--p", type=int)
    bound.add_argument("--norm", choices=("l1", "l2", "linf"))
    bound.add_argument("--depth", "-T", type=int, dest="depth")
    bound.add_argument("--jsr-depth", type=int, default=4, dest="jsr_depth")
    bound.add_argument("--starts", type=int)
    bound.add_argument("--seed", type=int)
    bound.add_argument("--certify-grid", type=float, dest="certify_grid")
    _add_common(bound)
    bound.set_defaults(func=cmd_bound)

    overshoot = subs.add_parser("overshoot", help="exact chi_T with bound comparison")
    overshoot.add_argument("family")
    overshoot.add_argument("--depth", "-T", type=int, dest="depth", required=True)
    overshoot.add_argument("--p", type=int)
    overshoot.add_argument("--norm", choices=("l1", "l2", "linf"))
    overshoot.add_argument("--jsr-depth", type=int, default=4, dest="jsr_depth")
    overshoot.add_argument("--starts", type=int)
    overshoot.add_argument("--seed", type=int)
    overshoot.add_argument("--certify-grid", type=float, dest="certify_grid")
    _add_common(overshoot, plot=True)
    overshoot.set_defaults(func=cmd_overshoot)

    simulate_p = subs.add_parser("simulate", help="run a switched trajectory")
    simulate_p.add_argument("family")
    simulate_p.add_argument("--word", help="comma-separated member indices")
    simulate_p.add_argument("--law", choices=UPDATE_LAWS)
    simulate_p.add_argument("--model", choices=("mixture", "vertex"), default="mixture")
    simulate_p.add_argument("--steps", type=int, default=0)
    simulate_p.add_argument("--seed", type=int)
    simulate_p.add_argument("--x0", help="comma-separated initial state")
    simulate_p.add_argument("--norm", choices=("l1", "l2", "linf"))
    _add_common(simulate_p, plot=True)
    simulate_p.set_defaults(func=cmd_simulate)

    witness = subs.add_parser("witness", help="build an instability witness")
    witness.add_argument("family")
    witness.add_argument("--p", type=int)
    witness.add_argument("--seed-word", required=True, dest="seed_word")
    witness.add_argument("--seed-x", required=True, dest="seed_x")
    witness.add_argument("--mu", type=float, required=True)
    witness.add_argument("--x0")
    witness.add_argument("--blocks", type=int, default=8)
    witness.add_argument("--sigma-lower", type=float, dest="sigma_lower")
    witness.add_argument("--norm", choices=("l1", "l2", "linf"))
    witness.add_argument("--starts", type=int)
    witness.add_argument("--seed", type=int)
    witness.add_argument("--certify-grid", type=float, dest="certify_grid")
    _add_common(witness, plot=True)
    witness.set_defaults(func=cmd_witness)

    sweep = subs.add_parser("sweep", help="parameterized family sweep")
    sweep.add_argument("generator")
    sweep.add_argument("--taus", help="comma-separated parameter values")
    sweep.add_argument("--p", type=int)
    sweep.add_argument("--depth", "-T", type=int, dest="depth")
    sweep.add_argument("--probe", action="store_true", help="instability persistence probe")
    sweep.add_argument("--starts", type=int)
    sweep.add_argument("--seed", type=int)
    sweep.add_argument("--certify-grid", type=float, dest="certify_grid")
    _add_common(sweep, plot=True)
    sweep.set_defaults(func=cmd_sweep)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FamilyFormatError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except EnumerationCapError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (WitnessPreconditionError, ProbeInapplicableError) as exc:
        print(f"precondition failed: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
