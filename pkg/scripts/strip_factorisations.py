#!/usr/bin/env python3
"""
Verify strip factorisations, cartesian factorisations and diagonal actions.

Every subcommand builds the groups it is given, runs one verification or
search and writes a JSON report. Negative mathematical outcomes (no
factorisation, no embedding) are results, not errors.
"""

import argparse
import os
import sys
import time
from typing import Any, Callable, Dict, List, Optional, Sequence, Set, Tuple

from scripts.lib import __version__
from scripts.lib.cartesian import (
    DEFAULT_FAMILY_BUDGET,
    FactorAutomorphism,
    FactorTransitiveAutGroup,
    enumerate_cartesian_over,
    mainstripfact_verify,
)
from scripts.lib.diagonal_actions import (
    DEFAULT_EQUIVARIANCE_SAMPLES,
    DEFAULT_POINT_CAP,
    DiagonalAction,
    EmbeddingWitness,
    build_diagonal_action,
    check_base_group_containment,
    check_structural_quasiprimitivity,
    embed_compound,
    search_invariant_cartesian_decompositions,
    verify_witness,
)
from scripts.lib.factorisation import (
    DEFAULT_PAIR_BUDGET,
    DEFAULT_SAMPLES,
    doublestrips_batch,
    g6_joint_uniform_search,
    nostripfact_search,
    orthstrip_check,
)
from scripts.lib.formatters import load_witness, validate_report, write_report, write_witness, write_xlsx
from scripts.lib.groups import (
    DEFAULT_ELEMENT_CAP,
    Automorphism,
    FiniteGroup,
    GroupComputationError,
    enumerate_automorphisms,
    fixed_points,
    is_solvable,
    is_uniform,
    make_group,
    parse_group_spec,
)
from scripts.lib.models import RunReport, WitnessFile
from scripts.lib.sampling import DEFAULT_SEED, PRNG_ALGORITHM
from scripts.lib.strips import DirectPower, FullStrip, StripProduct


SEARCH_MODES = ["exhaustive", "sampled"]

# ANSI cyan for the [scope] tag
SCOPE_COLOR = "\033[36m"
RESET_COLOR = "\033[0m"


def _use_color() -> bool:
    return sys.stderr.isatty() and "CLI_NO_COLOR" not in os.environ


def log(scope: str, message: str) -> None:
    """Log a message with scope prefix."""
    tag = f"[{scope}]"
    if _use_color():
        tag = f"{SCOPE_COLOR}{tag}{RESET_COLOR}"
    print(f"{tag} {message}", file=sys.stderr)


def progress_for(scope: str) -> Callable[[str], None]:
    return lambda message: log(scope, message)


def validate_k(k: int, minimum: int = 2) -> int:
    """
    Validate the number of coordinates.

    Raises:
        ValueError: If k is below the minimum
    """
    if k < minimum:
        raise ValueError(f"--k must be at least {minimum}, got {k}")
    return k


def validate_supports(text: str, k: int) -> List[Tuple[int, ...]]:
    """
    Parse strip supports such as ``12,34`` or ``1.2.10,3.4``.

    A support is written as digits, or as dot-separated numbers when a
    coordinate exceeds 9.

    Args:
        text: Comma-separated supports
        k: Number of coordinates

    Returns:
        Sorted supports, each sorted ascending

    Raises:
        ValueError: If a support is malformed, out of range, or overlaps another
    """
    supports = []
    used: Set[int] = set()
    for token in (t.strip() for t in text.split(",")):
        if not token:
            continue
        parts = token.split(".") if "." in token else list(token)
        try:
            coords = tuple(sorted(int(p) for p in parts))
        except ValueError:
            raise ValueError(f"Invalid strip support: {token!r}")
        if len(set(coords)) != len(coords) or len(coords) < 2:
            raise ValueError(f"Strip support {token!r} needs at least two distinct coordinates")
        if coords[0] < 1 or coords[-1] > k:
            raise ValueError(f"Strip support {token!r} out of range 1..{k}")
        if used & set(coords):
            raise ValueError(f"Strip supports overlap on {sorted(used & set(coords))}")
        used |= set(coords)
        supports.append(coords)
    if not supports:
        raise ValueError("At least one strip support is required")
    return sorted(supports)


def validate_permutation(text: str, k: int) -> Tuple[int, ...]:
    """
    Parse a coordinate permutation in one-line notation, e.g. ``2341`` or ``2.3.4.1``.

    Raises:
        ValueError: If the text is not a permutation of 1..k
    """
    parts = text.split(".") if "." in text else list(text.strip())
    try:
        perm = tuple(int(p) for p in parts)
    except ValueError:
        raise ValueError(f"Invalid permutation: {text!r}")
    if sorted(perm) != list(range(1, k + 1)):
        raise ValueError(f"{text!r} is not a permutation of 1..{k}")
    return perm


def validate_indices(text: str, count: int, flag: str) -> List[int]:
    """
    Parse comma-separated automorphism indices.

    Raises:
        ValueError: If an index is not an integer in 0..count-1
    """
    try:
        indices = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError(f"{flag} must be comma-separated integers, got {text!r}")
    if not indices:
        raise ValueError(f"{flag} needs at least one index")
    bad = [i for i in indices if i < 0 or i >= count]
    if bad:
        raise ValueError(f"{flag} index {bad[0]} out of range 0..{count - 1}")
    return indices


def support_text(support: Sequence[int]) -> str:
    """Inverse of validate_supports for one support."""
    sep = "." if max(support) > 9 else ""
    return sep.join(str(c) for c in support)


def build_group(spec_text: str, cap: int) -> FiniteGroup:
    return make_group(parse_group_spec(spec_text), cap=cap)


def diagonal_strips(T: FiniteGroup, k: int, supports: Sequence[Tuple[int, ...]]) -> StripProduct:
    """Strip product with identity twists on the given supports."""
    M = DirectPower(T, k)
    identity = Automorphism.identity(T)
    strips = tuple(FullStrip(M, s, (identity,) * (len(s) - 1)) for s in supports)
    return StripProduct(M, strips)


def _base_config(args: argparse.Namespace, group: str) -> Dict[str, Any]:
    return {"group": group, "element_cap": args.element_cap, "prng": PRNG_ALGORITHM}


def _automorphism_entry(index: int, alpha: Automorphism) -> Dict[str, Any]:
    return {"index": index, "images": alpha.to_list()}


# ---------------------------------------------------------------------------
# Subcommands


def cmd_uniform(args: argparse.Namespace) -> RunReport:
    """List the uniform automorphisms of a group and check the fixed-point criterion."""
    G = build_group(args.group, args.element_cap)
    log("uniform", f"Enumerating automorphisms of {G.name} (order {G.order})...")
    auts = enumerate_automorphisms(G, cap=args.element_cap)
    uniform: List[Dict[str, Any]] = []
    exceptions: List[Dict[str, Any]] = []
    for i, alpha in enumerate(auts):
        verdict = is_uniform(alpha)
        fixed_point_free = fixed_points(alpha) == frozenset({0})
        if verdict.uniform:
            uniform.append(_automorphism_entry(i, alpha))
        if verdict.uniform != fixed_point_free:
            exceptions.append({"index": i, "uniform": verdict.uniform, "fixed_point_free": fixed_point_free})
    solvable = is_solvable(G)
    results: Dict[str, Any] = {
        "group": G.name,
        "order": G.order,
        "abelian": G.is_abelian,
        "solvable": solvable,
        "has_uniform": bool(uniform),
    }
    if G.is_abelian:
        inversion = [int(g) for g in G.inverses]
        results["inversion_uniform"] = any(e["images"] == inversion for e in uniform)
    if not uniform:
        results["note"] = "no uniform automorphism" + ("" if solvable else f"; {G.name} is not solvable")
    log("uniform", f"{len(uniform)} of {len(auts)} automorphisms are uniform")
    return RunReport(
        command="uniform",
        version=__version__,
        config=_base_config(args, args.group),
        results=results,
        counts={"automorphisms": len(auts), "uniform": len(uniform), "criterion_exceptions": len(exceptions)},
        witnesses={"uniform_automorphisms": uniform, "criterion_exceptions": exceptions},
    )


def cmd_orthstrip(args: argparse.Namespace) -> RunReport:
    """Check the two-strip criterion over all automorphism pairs."""
    T = build_group(args.group, args.element_cap)
    report = orthstrip_check(T, pair_budget=args.pair_budget, progress=progress_for("orthstrip"))
    results = report.to_dict()
    counterexamples = results.pop("counterexamples")
    config = _base_config(args, args.group)
    config["pair_budget"] = args.pair_budget
    return RunReport(
        command="orthstrip",
        version=__version__,
        config=config,
        results=results,
        counts={
            "pairs_checked": report.pairs_checked,
            "factorising_pairs": report.factorising_pairs,
            "uniform_pairs": report.uniform_pairs,
            "counterexamples": len(counterexamples),
        },
        witnesses={"counterexamples": counterexamples},
    )


def cmd_doublestrips(args: argparse.Namespace) -> RunReport:
    """Run the double-strip solver on seeded random targets."""
    T = build_group(args.group, args.element_cap)
    auts = enumerate_automorphisms(T, cap=args.element_cap)
    alpha_idx = validate_indices(args.alphas, len(auts), "--alphas")
    beta_idx = validate_indices(args.betas, len(auts), "--betas")
    if len(alpha_idx) != len(beta_idx):
        raise ValueError(f"--alphas and --betas must have the same length ({len(alpha_idx)} != {len(beta_idx)})")
    log("doublestrips", f"{T.name}, d = {len(alpha_idx)}: solving {args.targets} targets")
    report = doublestrips_batch([auts[i] for i in alpha_idx], [auts[i] for i in beta_idx],
                                targets=args.targets, seed=args.seed)
    results = report.to_dict()
    solutions = results.pop("solutions")
    config = _base_config(args, args.group)
    config.update({"alphas": alpha_idx, "betas": beta_idx, "targets": args.targets, "seed": args.seed})
    return RunReport(
        command="doublestrips",
        version=__version__,
        config=config,
        results=results,
        counts={"targets": report.targets, "solved": report.solved},
        witnesses={"solutions": solutions},
    )


def cmd_g6(args: argparse.Namespace) -> RunReport:
    """Measure joint uniformity and the six-coordinate product deficiency."""
    G = build_group(args.group, args.element_cap)
    log("g6", f"Measuring joint images over automorphism pairs of {G.name}...")
    report = g6_joint_uniform_search(G, pair_budget=args.pair_budget, targets=args.targets, seed=args.seed)
    config = _base_config(args, args.group)
    config.update({"pair_budget": args.pair_budget, "targets": args.targets, "seed": args.seed})
    return RunReport(
        command="g6",
        version=__version__,
        config=config,
        results=report.to_dict(),
        counts={"pairs_checked": report.pairs_checked, "constructive_hits": report.constructive_hits},
    )


def cmd_stripfact(args: argparse.Namespace) -> RunReport:
    """Search pairs of strip products in T^k for factorisations."""
    T = build_group(args.group, args.element_cap)
    k = validate_k(args.k)
    report = nostripfact_search(
        T, k, mode=args.mode, samples=args.n, seed=args.seed, pair_budget=args.pair_budget,
        require_hypothesis=False, progress=progress_for("stripfact"),
    )
    results = report.to_dict()
    results.pop("elapsed_ms", None)
    first = results.pop("first_witness")
    if not report.hypothesis_certified:
        results["note"] = f"{T.name} admits a uniform automorphism; the non-factorisation hypothesis fails"
    log("stripfact", f"{report.factorisations_found} factorisations in {report.candidates_checked} pairs")
    config = _base_config(args, args.group)
    config.update({"k": k, "mode": args.mode, "n": args.n, "seed": args.seed, "pair_budget": args.pair_budget})
    return RunReport(
        command="stripfact",
        version=__version__,
        config=config,
        results=results,
        counts={"candidates_checked": report.candidates_checked,
                "factorisations_found": report.factorisations_found},
        witnesses={"first_factorisation": [] if first is None else [first]},
    )


def _top_automorphisms(M: DirectPower, perms: Optional[Sequence[str]]) -> Optional[List[FactorAutomorphism]]:
    if perms is None:
        return None
    return [FactorAutomorphism.permutation(M, validate_permutation(p, M.k)) for p in perms]


def cmd_cartesian(args: argparse.Namespace) -> RunReport:
    """Enumerate G0-invariant cartesian factorisations over a strip product M0."""
    T = build_group(args.group, args.element_cap)
    k = validate_k(args.k)
    m0 = diagonal_strips(T, k, validate_supports(args.m0, k))
    M = m0.ambient
    G0 = FactorTransitiveAutGroup(M, _top_automorphisms(M, args.top) or [], check_transitive=False)
    log("cartesian", f"{M.label}: M0 = {m0}, G0 on factors transitive: {G0.is_transitive}")
    found = enumerate_cartesian_over(M, m0, G0, family_budget=args.family_budget)
    families = []
    statuses: Dict[str, int] = {}
    for cf in found:
        meeting = mainstripfact_verify(cf, G0)
        statuses[meeting.status] = statuses.get(meeting.status, 0) + 1
        families.append({"family": cf.to_dict(), "meeting_strips": meeting.to_dict()})
    log("cartesian", f"{len(found)} invariant cartesian factorisations")
    config = _base_config(args, args.group)
    config.update({"k": k, "m0": args.m0, "top": list(args.top or []), "family_budget": args.family_budget})
    counts = {"factorisations": len(found)}
    counts.update({f"status_{name}": n for name, n in sorted(statuses.items())})
    return RunReport(
        command="cartesian",
        version=__version__,
        config=config,
        results={"ambient": M.label, "m0_order": m0.order, "factor_transitive": G0.is_transitive},
        counts=counts,
        witnesses={"factorisations": families},
    )


def _diag_action(args: argparse.Namespace, default_supports: Optional[str] = None) -> DiagonalAction:
    T = build_group(args.base, args.element_cap)
    k = validate_k(args.k)
    supports = args.strips or default_supports
    if supports is None:
        raise ValueError("--strips is required")
    sp = diagonal_strips(T, k, validate_supports(supports, k))
    top = _top_automorphisms(sp.ambient, args.top)
    log("diag", f"Building the action of {sp.ambient.label} on the cosets of {sp}...")
    D = build_diagonal_action(T, sp, top=top, point_cap=args.cap)
    log("diag", f"{D.degree} points, {D.diagonal_type} type, {len(D.top)} top generators")
    return D


def _diag_config(args: argparse.Namespace, D: DiagonalAction) -> Dict[str, Any]:
    config = _base_config(args, args.base)
    config.update({
        "k": D.ambient.k,
        "strips": ",".join(support_text(s) for s in D.stabilizer.supports),
        "top": list(args.top) if args.top is not None else None,
        "cap": args.cap,
    })
    return config


def cmd_diag_build(args: argparse.Namespace) -> RunReport:
    """Build a diagonal action and run the structural quasiprimitivity checks."""
    D = _diag_action(args)
    qp = check_structural_quasiprimitivity(D)
    results = {"action": D.to_dict(), "quasiprimitivity": qp.to_dict()}
    return RunReport(
        command="diag build",
        version=__version__,
        config=_diag_config(args, D),
        results=results,
        counts={"points": D.degree, "strips": D.strip_count, "top_generators": len(D.top)},
    )


def cmd_diag_embed(args: argparse.Namespace) -> RunReport:
    """Identify a compound diagonal action with a product action and write the witness."""
    D = _diag_action(args)
    witness = embed_compound(D, samples=args.samples, seed=args.seed, progress=progress_for("diag"))
    W = witness.wreath()
    m_images = {name: witness.images[name] for name in D.m_generators}
    containment = check_base_group_containment(W, m_images)
    written = None
    if args.witness:
        written = write_witness(WitnessFile(
            version=__version__,
            group=args.base,
            k=D.ambient.k,
            stabilizer=D.stabilizer.to_dict(),
            witness=witness.to_dict(),
            top=[a.to_dict() for a in D.top],
            seed=args.seed,
        ), args.witness)
        log("diag", f"Witness written to: {written}")
    assert witness.check is not None
    config = _diag_config(args, D)
    config.update({"samples": args.samples, "seed": args.seed})
    return RunReport(
        command="diag embed",
        version=__version__,
        config=config,
        results={
            "delta_size": witness.delta_size,
            "r": witness.r,
            "blocks": [list(b) for b in witness.blocks],
            "equivariance": witness.check.to_dict(),
            "base_group_containment": containment.to_dict(),
            "witness_file": written,
        },
        counts={"points": D.degree, "pairs_checked": witness.check.pairs_checked,
                "failures": witness.check.failures},
    )


def cmd_diag_no_embed_check(args: argparse.Namespace) -> RunReport:
    """Search for invariant cartesian decompositions; a single full strip by default."""
    k = validate_k(args.k)
    D = _diag_action(args, default_supports=".".join(str(c) for c in range(1, k + 1)))
    report = search_invariant_cartesian_decompositions(D, family_budget=args.family_budget,
                                                       progress=progress_for("diag"))
    qp = check_structural_quasiprimitivity(D)
    results = report.to_dict()
    decompositions = results.pop("decompositions")
    results["quasiprimitivity"] = qp.to_dict()
    results["embeds"] = bool(decompositions)
    config = _diag_config(args, D)
    config["family_budget"] = args.family_budget
    log("diag", f"{len(decompositions)} invariant cartesian decompositions")
    return RunReport(
        command="diag no-embed-check",
        version=__version__,
        config=config,
        results=results,
        counts={"candidates": report.candidates, "families_checked": report.families_checked,
                "decompositions": len(decompositions)},
        witnesses={"decompositions": decompositions},
    )


def cmd_diag_verify_witness(args: argparse.Namespace) -> RunReport:
    """Rebuild the action recorded in a witness file and check equivariance again."""
    wf = load_witness(args.witness)
    T = build_group(wf.group, args.element_cap)
    M = DirectPower(T, wf.k)
    sp = StripProduct.from_dict(M, wf.stabilizer)
    top = [FactorAutomorphism.from_dict(M, a) for a in wf.top]
    D = build_diagonal_action(T, sp, top=top, point_cap=args.cap)
    witness = EmbeddingWitness.from_dict(wf.witness)
    check = verify_witness(D, witness, samples=args.samples, seed=args.seed)
    log("diag", f"{check.pairs_checked} pairs checked, {check.failures} failures ({check.mode})")
    config = _base_config(args, wf.group)
    config.update({"k": wf.k, "witness": args.witness, "samples": args.samples, "seed": args.seed,
                   "cap": args.cap})
    return RunReport(
        command="diag verify-witness",
        version=__version__,
        config=config,
        results={"equivariance": check.to_dict(), "delta_size": witness.delta_size, "r": witness.r},
        counts={"pairs_checked": check.pairs_checked, "failures": check.failures},
    )


HANDLERS: Dict[str, Callable[[argparse.Namespace], RunReport]] = {
    "uniform": cmd_uniform,
    "orthstrip": cmd_orthstrip,
    "doublestrips": cmd_doublestrips,
    "g6": cmd_g6,
    "stripfact": cmd_stripfact,
    "cartesian": cmd_cartesian,
    "diag build": cmd_diag_build,
    "diag embed": cmd_diag_embed,
    "diag no-embed-check": cmd_diag_no_embed_check,
    "diag verify-witness": cmd_diag_verify_witness,
}


# ---------------------------------------------------------------------------
# Argument parsing


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--output", help="Write the JSON report to this file instead of stdout.")
    parser.add_argument("--xlsx", help="Also write the report as a spreadsheet to this file.")
    parser.add_argument("--element-cap", type=int, default=DEFAULT_ELEMENT_CAP,
                        help=f"Largest group order accepted (default: {DEFAULT_ELEMENT_CAP}).")


def _add_group(parser: argparse.ArgumentParser, flag: str = "--group") -> None:
    parser.add_argument(flag, required=True, help="Group spec, e.g. alternating:5, cyclic:9 or @group.json.")


def _add_seed(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--seed", type=int, default=DEFAULT_SEED, help=f"PRNG seed (default: {DEFAULT_SEED}).")


def _add_diag_action(parser: argparse.ArgumentParser, strips_required: bool = True) -> None:
    _add_group(parser, "--base")
    parser.add_argument("--k", type=int, required=True, help="Number of coordinates.")
    parser.add_argument("--strips", required=strips_required,
                        help="Supports of the stabiliser strips, e.g. 12,34 (identity twists).")
    parser.add_argument("--top", nargs="*",
                        help="Coordinate permutations on top of M, e.g. 2341. Default: all normalising ones.")
    parser.add_argument("--cap", type=int, default=DEFAULT_POINT_CAP,
                        help=f"Largest number of points (default: {DEFAULT_POINT_CAP}).")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="strip-factorisations",
        description=(
            "Verify uniform automorphisms, strip factorisations of direct powers, "
            "cartesian factorisations and diagonal-type actions, with JSON reports."
        ),
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Uniform automorphisms of C9
  %(prog)s uniform --group cyclic:9

  # Exhaustive strip factorisation search in A5^2
  %(prog)s stripfact --group alternating:5 --k 2 --mode exhaustive

  # Sampled search in A5^4, reproducible from the seed
  %(prog)s stripfact --group alternating:5 --k 4 --mode sampled --n 10000 --seed 0

  # Product-action embedding of a compound diagonal action
  %(prog)s diag embed --base alternating:5 --k 4 --strips 12,34 --witness witness.json

  # No invariant cartesian decomposition for a simple diagonal action
  %(prog)s diag no-embed-check --base alternating:5 --k 3

Exit codes: 0 analysis completed, 2 invalid input, 3 cap or budget exceeded.
        """,
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("uniform", help="List uniform automorphisms of a group.")
    _add_group(p)
    _add_common(p)

    p = sub.add_parser("orthstrip", help="Check the two-strip criterion over all automorphism pairs.")
    _add_group(p)
    p.add_argument("--pair-budget", type=int, default=DEFAULT_PAIR_BUDGET)
    _add_common(p)

    p = sub.add_parser("doublestrips", help="Solve x = t·s for interleaved strip products.")
    _add_group(p)
    p.add_argument("--alphas", required=True, help="Automorphism indices α_1..α_d, e.g. 0,1.")
    p.add_argument("--betas", required=True, help="Automorphism indices β_1..β_d.")
    p.add_argument("--targets", type=int, default=20, help="Random targets to solve (default: 20).")
    _add_seed(p)
    _add_common(p)

    p = sub.add_parser("g6", help="Joint uniformity and the six-coordinate example.")
    _add_group(p)
    p.add_argument("--pair-budget", type=int, default=DEFAULT_PAIR_BUDGET)
    p.add_argument("--targets", type=int, default=1000, help="Targets for the constructive run (default: 1000).")
    _add_seed(p)
    _add_common(p)

    p = sub.add_parser("stripfact", help="Search pairs of strip products for factorisations of T^k.")
    _add_group(p)
    p.add_argument("--k", type=int, required=True, help="Number of coordinates.")
    p.add_argument("--mode", choices=SEARCH_MODES, default="exhaustive")
    p.add_argument("--n", type=int, default=DEFAULT_SAMPLES,
                   help=f"Pairs in sampled mode (default: {DEFAULT_SAMPLES}).")
    p.add_argument("--pair-budget", type=int, default=DEFAULT_PAIR_BUDGET)
    _add_seed(p)
    _add_common(p)

    p = sub.add_parser("cartesian", help="Enumerate invariant cartesian factorisations over M0.")
    _add_group(p)
    p.add_argument("--k", type=int, required=True, help="Number of coordinates.")
    p.add_argument("--m0", required=True, help="Supports of M0's strips, e.g. 12,34 (identity twists).")
    p.add_argument("--top", nargs="*", help="Coordinate permutations generating G0, e.g. 2341.")
    p.add_argument("--family-budget", type=int, default=DEFAULT_FAMILY_BUDGET)
    _add_common(p)

    diag = sub.add_parser("diag", help="Diagonal-type actions and product-action wreath products.")
    diag_sub = diag.add_subparsers(dest="diag_command", required=True, metavar="DIAG_COMMAND")

    p = diag_sub.add_parser("build", help="Build a diagonal action and check it structurally.")
    _add_diag_action(p)
    _add_common(p)

    p = diag_sub.add_parser("embed", help="Embed a compound diagonal action in a product action.")
    _add_diag_action(p)
    p.add_argument("--witness", help="Write the embedding witness to this file.")
    p.add_argument("--samples", type=int, default=DEFAULT_EQUIVARIANCE_SAMPLES)
    _add_seed(p)
    _add_common(p)

    p = diag_sub.add_parser("no-embed-check", help="Search for invariant cartesian decompositions.")
    _add_diag_action(p, strips_required=False)
    p.add_argument("--family-budget", type=int, default=DEFAULT_FAMILY_BUDGET)
    _add_common(p)

    p = diag_sub.add_parser("verify-witness", help="Check a witness file written by 'diag embed'.")
    p.add_argument("--witness", required=True, help="Witness file to check.")
    p.add_argument("--samples", type=int, default=DEFAULT_EQUIVARIANCE_SAMPLES)
    p.add_argument("--cap", type=int, default=DEFAULT_POINT_CAP)
    _add_seed(p)
    _add_common(p)

    return parser


def command_name(parsed: argparse.Namespace) -> str:
    if parsed.command == "diag":
        return f"diag {parsed.diag_command}"
    return parsed.command


def main(args: Optional[List[str]] = None) -> int:
    """
    Main entry point for the CLI.

    Args:
        args: Command line arguments (uses sys.argv if None)

    Returns:
        Exit code (0 when the analysis completed, 2 for invalid input,
        3 when a cap or budget was exceeded)
    """
    parsed_args = build_parser().parse_args(args)
    name = command_name(parsed_args)
    started = time.monotonic()

    try:
        report = HANDLERS[name](parsed_args)
        report.elapsed_ms = int((time.monotonic() - started) * 1000)
        validate_report(report)
    except ValueError as e:
        print(f"Error: {e}", file=sys.stderr)
        return 2
    except GroupComputationError as e:
        print(f"Error: {e}", file=sys.stderr)
        return e.exit_code

    written = write_report(report, parsed_args.output)
    if written:
        print(f"\nReport written to: {written}", file=sys.stderr)
    if parsed_args.xlsx:
        print(f"Spreadsheet written to: {write_xlsx(report, parsed_args.xlsx)}", file=sys.stderr)

    return 0


if __name__ == "__main__":
    sys.exit(main())
