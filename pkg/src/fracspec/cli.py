"""Command-line entry point: ``fracspec <subcommand> [flags]``.

Structured results are JSON with an embedded ``manifest``; scan tables are
CSV whose first line is ``# manifest {...}``. Exit codes: 0 success, 1
computational failure, 2 invalid input.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import os
import sys
import time
from datetime import datetime, timezone
from fractions import Fraction

import numpy as np

from . import __version__
from .errors import ComputationError, ValidationError
from .ifs_core import AffineIFS, DigitSet, ExpansiveIntMatrix, load_ifs_json

SUBCOMMANDS = (
    "check-hadamard", "find-cycles", "gen-spectrum", "verify-onb", "completeness-scan",
    "mu-hat", "h-scan", "lawton", "cohen", "cascade", "parseval", "super-gram",
    "brolin-moments", "k2-split", "probe-problem2", "probe-overlap",
)


# --- parsing helpers -----------------------------------------------------------

def _int_list(text: str, what: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise ValidationError(f"{what}: expected comma-separated integers, got {text!r}") from None


def parse_matrix(text: str):
    """``"4"`` or ``"2,1;0,2"`` (rows separated by ``;``)."""
    rows = [_int_list(r, "A") for r in text.split(";")]
    if len(rows) == 1 and len(rows[0]) == 1:
        return rows[0][0]
    return rows


def parse_digits(text: str, what: str):
    """``"0,2"`` in one dimension, ``"0,0;1,0"`` (one point per row) otherwise."""
    if ";" in text:
        return [_int_list(r, what) for r in text.split(";")]
    return _int_list(text, what)


def _fraction_list(text: str, what: str) -> list[Fraction]:
    try:
        return [Fraction(t.strip()) for t in text.split(",") if t.strip()]
    except (ValueError, ZeroDivisionError):
        raise ValidationError(f"{what}: expected comma-separated numbers or p/q, got {text!r}") from None


def _range(text: str, what: str) -> range:
    try:
        lo, hi = (int(t) for t in text.split(":"))
    except ValueError:
        raise ValidationError(f"{what}: expected lo:hi, got {text!r}") from None
    return range(lo, hi + 1)


def _frac_json(f: Fraction):
    return int(f) if f.denominator == 1 else str(f)


def _point_json(p):
    vals = [_frac_json(v) for v in p]
    return vals[0] if len(vals) == 1 else vals


# --- manifest and emission -------------------------------------------------------

class RunManifest:
    def __init__(self, args: argparse.Namespace):
        self.subcommand = args.command
        self.config = {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "func")}
        self.seed = args.seed
        self.started = time.time()
        self.digests = {}
        for key in ("ifs", "input"):
            path = getattr(args, key, None)
            if path:
                with open(path, "rb") as fh:
                    self.digests[path] = hashlib.sha256(fh.read()).hexdigest()

    def to_json(self) -> dict:
        return {
            "subcommand": self.subcommand,
            "config": self.config,
            "version": __version__,
            "seed": self.seed,
            "timestamp": datetime.fromtimestamp(self.started, timezone.utc).isoformat(),
            "wall_clock_seconds": round(time.time() - self.started, 6),
            "input_digests": self.digests,
        }


def _write(args, text: str) -> None:
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def emit_json(args, manifest: RunManifest, result: dict) -> None:
    doc = dict(result)
    doc["manifest"] = manifest.to_json()
    _write(args, json.dumps(doc, indent=2, default=_json_default) + "\n")


def emit_csv(args, manifest: RunManifest, header: list[str], rows, summary: dict | None = None) -> None:
    buf = io.StringIO()
    buf.write("# manifest " + json.dumps(manifest.to_json(), default=_json_default) + "\n")
    if summary is not None:
        buf.write("# summary " + json.dumps(summary, default=_json_default) + "\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in r])
    _write(args, buf.getvalue())


def _json_default(o):
    if isinstance(o, Fraction):
        return _frac_json(o)
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serializable: {type(o).__name__}")


# --- input resolution -------------------------------------------------------------

def _triple(args, need_B=True, need_L=True):
    A = B = L = None
    if args.ifs:
        A, B, L = load_ifs_json(args.ifs)
    if args.A is not None:
        A = ExpansiveIntMatrix(parse_matrix(args.A))
    if args.B is not None:
        B = DigitSet(parse_digits(args.B, "B"))
    if args.L is not None:
        L = DigitSet(parse_digits(args.L, "L"))
    if A is None:
        raise ValidationError("A required")
    if need_B and B is None:
        raise ValidationError("B required")
    if need_L and L is None:
        raise ValidationError("L required")
    return A, B, L


def _filter(args):
    from .filters import TrigPolynomial, filter_from_digits, haar_filter, stretched_haar_filter

    name = args.filter
    if name is None:
        if args.B is None and not args.ifs:
            raise ValidationError("filter required (--filter or --B)")
        _, B, _ = _triple(args, need_L=False)
        return filter_from_digits(B)
    if name == "haar":
        return haar_filter()
    if name in ("stretched-haar", "stretched_haar"):
        return stretched_haar_filter()
    # "k:c,k:c" with rational or float coefficients
    coeffs = {}
    try:
        for part in name.split(","):
            k, c = part.split(":")
            c = c.strip()
            coeffs[int(k)] = Fraction(c) if "j" not in c and "e" not in c.lower() else complex(c)
    except ValueError:
        raise ValidationError(f"cannot parse filter {name!r}; use haar, stretched-haar or k:c,k:c") from None
    return TrigPolynomial(coeffs)


def _cycles_json(cycles):
    return [[_point_json(p) for p in c.point_fractions()] for c in cycles]


# --- subcommands -----------------------------------------------------------------

def cmd_check_hadamard(args, man):
    from .filters import hadamard_check

    A, B, L = _triple(args)
    emit_json(args, man, hadamard_check(A, B, L).to_json())


def cmd_find_cycles(args, man):
    from .cycles import find_cycles
    from .filters import filter_from_digits
    from .ifs_core import dual_ifs

    A, B, L = _triple(args)
    cyc = find_cycles(dual_ifs(A, L), filter_from_digits(B), args.max_period)
    emit_json(args, man, {"cycles": _cycles_json(cyc), "details": [c.to_json() for c in cyc]})


def _spectrum(args, A, B, L):
    from .cycles import find_cycles
    from .filters import filter_from_digits
    from .ifs_core import dual_ifs
    from .spectra import lambda0, spectrum_from_cycles

    level = 3 if args.level is None else args.level
    if B is None:
        return lambda0(A, L, level)
    cyc = find_cycles(dual_ifs(A, L), filter_from_digits(B), args.max_period)
    return spectrum_from_cycles(A, L, cyc, level)


def cmd_gen_spectrum(args, man):
    A, B, L = _triple(args, need_B=False)
    emit_json(args, man, _spectrum(args, A, B, L).to_json())


def cmd_verify_onb(args, man):
    from .spectra import verify_orthogonality

    A, B, L = _triple(args)
    spec = _spectrum(args, A, B, L)
    rep = verify_orthogonality(AffineIFS(A, B), spec.elements, target_err=args.err)
    emit_json(args, man, {"spectrum_size": len(spec), "gram": rep.to_json()})


def _grid(args, d):
    n = args.grid or 16
    axis = np.arange(n) / n
    if d == 1:
        return list(axis)
    return [np.array(p) for p in np.array(np.meshgrid(*[axis] * d, indexing="ij")).reshape(d, -1).T]


def cmd_completeness_scan(args, man):
    from .spectra import verify_completeness

    A, B, L = _triple(args)
    args.level = 8 if args.level is None else args.level
    spec = _spectrum(args, A, B, L)
    rows, gram = verify_completeness(AffineIFS(A, B), spec, _grid(args, A.d), range(args.level + 1), target_err=args.err)
    emit_csv(
        args, man, ["x", "level", "partial_sum", "n_terms", "error_bound"],
        ([";".join(map(repr, r.x)), r.level, r.partial_sum, r.n_terms, r.error_bound] for r in rows),
        {"gram": gram.to_json() if gram else None},
    )


def cmd_mu_hat(args, man):
    from .fourier_product import mu_hat

    A, B, _ = _triple(args, need_L=False)
    if args.x is None:
        raise ValidationError("x required")
    x = _fraction_list(args.x, "x")
    ev = mu_hat(AffineIFS(A, B), x, args.err)
    emit_json(args, man, {"x": [_frac_json(v) for v in x], **ev.to_json()})


def cmd_h_scan(args, man):
    from .fourier_product import mu_hat_batch

    A, B, L = _triple(args)
    spec = _spectrum(args, A, B, L)
    ifs = AffineIFS(A, B)
    lam = np.array(spec.elements, dtype=float)
    rows = []
    for x in _grid(args, A.d):
        vals, bounds = mu_hat_batch(ifs, lam + np.atleast_1d(x), args.err)
        h = float(np.sum(np.abs(vals) ** 2))
        err = float(np.sum((2 * np.abs(vals) + bounds) * bounds))
        rows.append([";".join(map(repr, np.atleast_1d(x).astype(float))), h, len(lam), err])
    emit_csv(args, man, ["x", "h_partial", "n_terms", "error_bound"], rows)


def _scale(args) -> ExpansiveIntMatrix:
    if args.A is not None:
        return ExpansiveIntMatrix(parse_matrix(args.A))
    if args.ifs:
        return load_ifs_json(args.ifs)[0]
    return ExpansiveIntMatrix(2)


def _branches(args, A):
    if args.L is not None:
        return DigitSet(parse_digits(args.L, "L"))
    if args.ifs:
        _, _, L = load_ifs_json(args.ifs)
        if L is not None:
            return L
    if args.filter is None:
        raise ValidationError("L required")
    return None


def cmd_lawton(args, man):
    from .transfer import lawton_test

    A = _scale(args)
    m = _filter(args)
    v = lawton_test(m, A, _branches(args, A), setting=args.setting, depth=args.depth)
    emit_json(args, man, v.to_json())


def cmd_cohen(args, man):
    from .transfer import cohen_test

    A = _scale(args)
    m = _filter(args)
    v = cohen_test(m, A, _branches(args, A), args.max_period, setting=args.setting)
    out = v.to_json()
    out["cycle_points"] = _cycles_json(v.cycles)
    emit_json(args, man, out)


def _cascade(args):
    from .wavelet import cascade

    m = _filter(args)
    a = int(args.A or 2)
    J = args.J
    it = args.iterations if args.iterations is not None else 3 * J
    return m, cascade(m, a, it, J)


def cmd_cascade(args, man):
    _, phi = _cascade(args)
    info = dict(phi.info)
    info["final_distance"] = info["distances"][-1] if info["distances"] else None
    info.pop("distances")
    emit_csv(args, man, ["x", "re", "im"], phi.to_csv_rows(), info)


def cmd_parseval(args, man):
    from .wavelet import SampledFunction, parseval_defect, wavelet_from_mra

    m, phi = _cascade(args)
    psi = wavelet_from_mra(m, phi)
    jr = _range(args.j_range, "j-range")
    kr = _range(args.k_range, "k-range") if args.k_range else range(-64, 2 ** max(jr.stop - 1, 0) + 64)
    f = SampledFunction.indicator(0, 1, args.J)
    d = parseval_defect(psi, [f], jr, kr)
    emit_json(args, man, {
        "test_function": "chi_[0,1)", "j_range": [jr.start, jr.stop - 1], "k_range": [kr.start, kr.stop - 1],
        "parseval_defect": d, "resolution_J": args.J,
    })


def cmd_super_gram(args, man):
    from .cycles import wavelet_cycles
    from .wavelet import super_function

    m, phi = _cascade(args)
    cyc = wavelet_cycles(m, int(args.A or 2), max_period=args.max_period)
    sf = super_function(cyc, phi, m)
    n = args.shifts
    G = sf.gram(range(-n, n + 1))
    emit_json(args, man, {
        "cycles": _cycles_json(cyc),
        "components": len(sf.points),
        "identity_deviation": float(np.max(np.abs(G - np.eye(len(G))))),
        "gram_real": np.round(G.real, 12).tolist(),
        "gram_imag": np.round(G.imag, 12).tolist(),
    })


def cmd_brolin_moments(args, man):
    from .complex_dyn import ComplexPolynomial, brolin_sample, moments

    c = complex(args.c.replace("i", "j")) if args.c else 0
    R = ComplexPolynomial.parse(args.poly, c)
    z = brolin_sample(R, args.n, args.burn_in, args.seed or 0)
    M = moments(z, args.n_max)
    rows = [[n, v.real, v.imag, e] for n, (v, e) in enumerate(zip(M.values, M.stderr))]
    summary = {"max_modulus_deviation": float(np.max(np.abs(np.abs(z) - 1))) if len(z) else None}
    emit_csv(args, man, ["n", "re", "im", "stderr"], rows, summary)


def cmd_k2_split(args, man):
    from .complex_dyn import LacunaryExpansion, k2_split

    if args.input:
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
    elif args.coeffs:
        text = args.coeffs
    else:
        raise ValidationError("input required (--input file or --coeffs JSON)")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"invalid JSON: {exc.msg}") from None
    f = LacunaryExpansion.from_json(data)
    F0, F1 = k2_split(f)
    emit_json(args, man, {
        "F0": F0.to_json(), "F1": F1.to_json(),
        "norm_sq": f.norm_sq, "norm_sq_F0": F0.norm_sq, "norm_sq_F1": F1.norm_sq,
        "norm_defect": abs(f.norm_sq - F0.norm_sq - F1.norm_sq),
    })


def cmd_probe_problem2(args, man):
    from .probes import EVIDENCE, probe_scaling_rules

    if args.rho is None or args.B is None:
        raise ValidationError("rho and B required")
    rho = Fraction(args.rho)
    B = _fraction_list(args.B, "B")
    p = _fraction_list(args.weights, "weights") if args.weights else None
    emit_json(args, man, {"status": EVIDENCE, "rows": probe_scaling_rules(rho, B, p)})


def cmd_probe_overlap(args, man):
    from .probes import EVIDENCE, probe_overlap

    A, B, _ = _triple(args, need_L=False)
    depths = _int_list(args.depths, "depths")
    emit_json(args, man, {"status": EVIDENCE, "rows": probe_overlap(AffineIFS(A, B), depths)})


# --- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--ifs", help="JSON file with A, B and optionally L")
    common.add_argument("--A", help="scale: integer or rows 'a,b;c,d'")
    common.add_argument("--B", help="digits: '0,2' or points '0,0;1,0'")
    common.add_argument("--L", help="dual digits / branches, same format as --B")
    common.add_argument("--err", type=float, default=1e-12, help="target truncation error")
    common.add_argument("--level", type=int)
    common.add_argument("--max-period", type=int)
    common.add_argument("--grid", type=int)
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=os.cpu_count(), help="accepted; computations are sequential and deterministic")

    p = argparse.ArgumentParser(prog="fracspec", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", metavar="SUBCOMMAND")
    sub.required = True

    def add(name, func, help_):
        sp = sub.add_parser(name, parents=[common], help=help_)
        sp.set_defaults(func=func)
        return sp

    add("check-hadamard", cmd_check_hadamard, "certify a Hadamard triple")
    add("find-cycles", cmd_find_cycles, "extreme cycles of the dual system")
    add("gen-spectrum", cmd_gen_spectrum, "leveled candidate or completed spectrum")
    add("verify-onb", cmd_verify_onb, "Gram check of the exponentials")
    add("completeness-scan", cmd_completeness_scan, "partial sums of |mu_hat|^2 by level (CSV)")
    add("mu-hat", cmd_mu_hat, "certified Fourier transform of mu_B").add_argument("--x", help="point, e.g. '1/3' or '0.2,0.5'")
    add("h-scan", cmd_h_scan, "h over a grid for the level truncation (CSV)")
    for name, func in (("lawton", cmd_lawton), ("cohen", cmd_cohen)):
        sp = add(name, func, f"{name} orthogonality test")
        sp.add_argument("--filter", help="haar, stretched-haar, or 'k:c,k:c'; default m_B from --B")
        sp.add_argument("--setting", choices=("wavelet", "fractal"))
        sp.add_argument("--depth", type=int, default=6, help="cylinder word length (fractal setting)")
    for name, func, help_ in (
        ("cascade", cmd_cascade, "cascade iterate as CSV (x, re, im)"),
        ("parseval", cmd_parseval, "truncated Parseval defect of the MRA wavelet"),
        ("super-gram", cmd_super_gram, "Gram of the cycle-augmented scaling function"),
    ):
        sp = add(name, func, help_)
        sp.add_argument("--filter", default="haar")
        sp.add_argument("--J", type=int, default=12)
        sp.add_argument("--iterations", type=int)
        if name == "parseval":
            sp.add_argument("--j-range", default="-8:8")
            sp.add_argument("--k-range")
        if name == "super-gram":
            sp.add_argument("--shifts", type=int, default=4)
    sp = add("brolin-moments", cmd_brolin_moments, "moments of the Brolin measure (CSV)")
    sp.add_argument("--poly", default="z^2")
    sp.add_argument("--c")
    sp.add_argument("--n", type=int, default=10000)
    sp.add_argument("--burn-in", type=int, default=100)
    sp.add_argument("--n-max", type=int, default=8)
    sp = add("k2-split", cmd_k2_split, "split a z^4-lacunary expansion")
    sp.add_argument("--input")
    sp.add_argument("--coeffs", help='inline JSON, e.g. \'{"5": [1, 0]}\'')
    sp = add("probe-problem2", cmd_probe_problem2, "evidence on scale, weight and digit conditions")
    sp.add_argument("--rho")
    sp.add_argument("--weights")
    sp = add("probe-overlap", cmd_probe_overlap, "cylinder upper bounds for piece overlaps")
    sp.add_argument("--depths", default="2,4,6,8")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        man = RunManifest(args)
        args.func(args, man)
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ComputationError as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
