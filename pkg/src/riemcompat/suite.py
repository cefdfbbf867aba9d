"""Sampled identity checks over a metric, aggregated into a deterministic report.

Each check evaluates one identity at every sample point and keeps the worst
scaled residual.  Checks whose hypotheses fail at a point are skipped there
with a reason; checks that raise are recorded as errored.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

from . import __version__
from .abc_tensors import abc_divergence_residual, abc_lower, abc_tensor, preset, prop66_residual, rk_transfer_residual
from .catalog import random_field, sample_points
from .compatibility import (build_k_from_b, commutation_checks, compat_residual, identity4_residual,
                            k_tensor_symmetry_residuals, lovelock_residual, riemann_divergence, veblen_residuals,
                            veblen_sum)
from .curvature import ChartedMetric, CurvaturePack, TensorField, covariant_derivative
from .decomposition import (decompose_gradient, deviation_split_residual, orthogonality_residuals,
                            reconstruction_residual, ricci_weyl_residual, trace_residuals, transvection_residual)
from .errors import DegenerateFrame, DomainError, InputError, RiemCompatError, SingularMetric
from .geodesic import deformation, invariance_residual, pair_checks
from .gr import (eh_decompose, is_static, stress_from_einstein, weyl_compat_and_bianchi_like,
                 weyl_divergence_matter_residual, weyl_lower_value, weyl_compat_point, cring_commutes)
from .purity import eigenframe, ds_check, pontryagin_frame_residual, purity_certificate
from .residual import Residual, make_residual
from .tensor import DenseTensor, jeinsum

SUITES = ("bianchi", "compat", "decomp", "abc", "purity", "geodesic", "gr")

# Default tolerances by how many derivatives of the metric a check consumes.
ALGEBRAIC, ONE_DERIV, TWO_DERIV = 1e-9, 1e-8, 1e-7
EXACT = 1e-10
# A field counts as compatible when its scaled compatibility sum is below this.
HYPOTHESIS_TOL = 1e-9


class Skip(Exception):
    """The check does not apply at this point."""


def worst(*residuals: Residual) -> Residual:
    return max(residuals, key=lambda r: r.scaled_max)


class PointContext:
    """Lazily computed quantities shared by every check at one sample point."""

    def __init__(self, metric: ChartedMetric, point, index: int, seed: int, fields: dict[str, TensorField]):
        self.metric = metric
        self.point = np.asarray(point, dtype=float)
        self.index = index
        self.seed = seed
        self.fields = fields
        self.n = metric.dim

    @cached_property
    def pack(self) -> CurvaturePack:
        self.metric.check_point(self.point)
        return CurvaturePack(self.metric, self.point)

    @property
    def user_b(self) -> bool:
        return "b" in self.fields

    @cached_property
    def b(self) -> DenseTensor:
        f = self.fields.get("b") or random_field(self.metric, self.seed, name="b")
        return self.pack.field(f)

    @cached_property
    def rng(self) -> np.random.Generator:
        return np.random.default_rng([self.seed, self.index])

    @cached_property
    def b_compat(self) -> Residual:
        return compat_residual(self.pack.riemann, self.b)

    @cached_property
    def compatible_b(self) -> tuple[str, DenseTensor]:
        """A symmetric tensor known or verified to be R-compatible here."""
        if self.user_b or self.n == 2:
            if self.b_compat.ok(HYPOTHESIS_TOL):
                return "b", self.b
            raise Skip(f"b is not R-compatible here (scaled {self.b_compat.scaled_max:.2e})")
        if self.n == 3:
            return "ricci", self.pack.ricci
        if self.b_compat.ok(HYPOTHESIS_TOL):
            return "b", self.b
        raise Skip("no R-compatible symmetric tensor available (supply one with --field)")

    def random_symmetric(self) -> np.ndarray:
        a = self.rng.normal(size=(self.n, self.n))
        return a + a.T


@dataclass(frozen=True)
class Check:
    id: str
    anchor: str
    tol: float
    run: Callable[[PointContext], Residual]
    applies: Callable[[ChartedMetric, dict], str | None] = lambda m, f: None  # reason to skip


_REGISTRY: dict[str, list[Check]] = {s: [] for s in SUITES}


def _check(suite: str, cid: str, anchor: str, tol: float, applies=None):
    def deco(fn):
        _REGISTRY[suite].append(Check(f"{suite}.{cid}", anchor, tol, fn, applies or (lambda m, f: None)))
        return fn
    return deco


def _need_dim(lo: int | None = None, hi: int | None = None, exact: int | None = None):
    def applies(m, f):
        n = m.dim
        if exact is not None and n != exact:
            return f"needs n = {exact}, got {n}"
        if lo is not None and n < lo:
            return f"needs n >= {lo}, got {n}"
        if hi is not None and n > hi:
            return f"needs n <= {hi}, got {n}"
        return None
    return applies


def _need_field(*names):
    def applies(m, f):
        missing = [x for x in names if x not in f]
        return f"needs field(s) {missing}" if missing else None
    return applies


def _riemannian(m, f):
    return None if m.riemannian else "needs a Riemannian metric"


def _lorentzian4(m, f):
    if not m.lorentzian:
        return "needs a Lorentzian metric"
    return None if m.dim == 4 else f"needs n = 4, got {m.dim}"


def _all(*preds):
    def applies(m, f):
        for p in preds:
            r = p(m, f)
            if r:
                return r
        return None
    return applies


# -- bianchi -------------------------------------------------------------------

@_check("bianchi", "riemann_symmetries", "def2.1", ALGEBRAIC)
def _c_riem_sym(c: PointContext):
    return worst(*k_tensor_symmetry_residuals(c.pack.riemann_lower).values())


@_check("bianchi", "contracted", "contracted-Bianchi", ONE_DERIV)
def _c_contracted(c: PointContext):
    div = riemann_divergence(c.pack).at_value()
    dric = covariant_derivative(c.pack, c.pack.ricci).at_value()  # [k, j, l]
    rhs = dric.permute("kjl", "jkl") - dric
    return make_residual("contracted_bianchi", "contracted-Bianchi", div - rhs, div, dric)


# -- compat --------------------------------------------------------------------

@_check("compat", "RC", "RC", ALGEBRAIC, _need_field("b"))
def _c_rc(c):
    return c.b_compat


@_check("compat", "CCCcomp", "CCCcomp", TWO_DERIV)
def _c_ccc(c):
    return identity4_residual(c.pack, c.b)


@_check("compat", "lovelock", "lovelock", TWO_DERIV)
def _c_lovelock(c):
    return lovelock_residual(c.pack)


@_check("compat", "VeblenC", "VeblenC", TWO_DERIV)
def _c_veblen(c):
    return veblen_residuals(c.pack, c.b)[0]


@_check("compat", "low_dim_theorem", "Riccicomp", ALGEBRAIC, _need_dim(hi=3))
def _c_lowdim(c):
    if c.n == 2:
        return compat_residual(c.pack.riemann, c.b)
    return compat_residual(c.pack.riemann, c.pack.ricci)


@_check("compat", "chain.veblenb", "veblenb", ONE_DERIV)
def _c_chain_veblenb(c):
    name, b = c.compatible_b
    return veblen_sum(c.pack.riemann, b)


@_check("compat", "chain.commutators", "Riccicomp", ONE_DERIV)
def _c_chain_comm(c):
    name, b = c.compatible_b
    return worst(*commutation_checks(c.pack.riemann, c.pack.g, b, h=b).values())


@_check("compat", "chain.k_tensor", "def2.1", ONE_DERIV)
def _c_chain_k(c):
    name, b = c.compatible_b
    k = build_k_from_b(c.pack.riemann_lower.at_value(), b.at_value(), c.pack.g.at_value())
    return worst(*k_tensor_symmetry_residuals(k).values())


# -- decomp --------------------------------------------------------------------

def _parts(c: PointContext):
    if not hasattr(c, "_parts"):
        c._parts = decompose_gradient(covariant_derivative(c.pack, c.b), c.pack.g, c.pack.ginv)
    return c._parts


@_check("decomp", "reconstruction", "Codazzi-decomposition", EXACT)
def _c_recon(c):
    return reconstruction_residual(_parts(c))


@_check("decomp", "traces", "tracelessC", EXACT)
def _c_traces(c):
    return worst(*trace_residuals(_parts(c)).values())


@_check("decomp", "cyclic_orthogonality", "Codazzi-decomposition", ALGEBRAIC)
def _c_orth(c):
    r = orthogonality_residuals(_parts(c))
    return worst(r["cyc_skew1"], r["cyc_skew2"], r["cyc_skew"])


@_check("decomp", "nablaCprime", "nablaCprime", TWO_DERIV)
def _c_split(c):
    return worst(deviation_split_residual(c.pack, c.b), transvection_residual(c.pack, c.b))


@_check("decomp", "RicciWeyl", "RicciWeyl", ONE_DERIV, _need_dim(lo=4))
def _c_ricci_weyl(c):
    return ricci_weyl_residual(c.pack)


# -- abc -----------------------------------------------------------------------

def _abcxx(c: PointContext, spec) -> Residual:
    if spec.A == 1.0:
        raise Skip("identity needs A != 1")
    return prop66_residual(c.pack, spec)[0]


def _abc_checks():
    for name, lo in (("weyl", 3), ("conharmonic", 3), ("projective", 2), ("concircular", 2)):
        def spec(c, name=name):
            return preset(name, c.n)

        _check("abc", f"{name}.divABC", "divABC", ONE_DERIV, _need_dim(lo=lo))(
            lambda c, spec=spec: abc_divergence_residual(c.pack, spec(c)))
        _check("abc", f"{name}.RK", "RK", ALGEBRAIC, _need_dim(lo=lo))(
            lambda c, spec=spec: rk_transfer_residual(c.pack, spec(c), c.b))
        _check("abc", f"{name}.abcxx", "abcxx", TWO_DERIV, _need_dim(lo=lo))(
            lambda c, spec=spec: _abcxx(c, spec(c)))
        if name != "projective":  # the projective tensor lacks the pair symmetries
            _check("abc", f"{name}.k_symmetries", "def2.1", ALGEBRAIC, _need_dim(lo=lo))(
                lambda c, spec=spec: worst(*k_tensor_symmetry_residuals(
                    abc_lower(abc_tensor(c.pack, spec(c)).at_value(), c.pack.g.at_value())).values()))


_abc_checks()


@_check("abc", "weyl.traceless", "Weyl-traceless", ALGEBRAIC, _need_dim(lo=3))
def _c_weyl_trace(c):
    C = abc_tensor(c.pack, preset("weyl", c.n)).at_value()
    tr = jeinsum("jklj->kl", C, check=False)
    tr2 = jeinsum("kmlm->kl", C, check=False)
    return make_residual("weyl_traces", "Weyl-traceless", np.maximum(np.abs(tr.values), np.abs(tr2.values)), C)


# -- purity --------------------------------------------------------------------

def _frame(c: PointContext):
    if not hasattr(c, "_frame"):
        if c.n == 3 and not c.user_b:
            src = c.pack.ricci
        else:
            if not c.b_compat.ok(HYPOTHESIS_TOL):
                raise Skip(f"frame tensor b is not R-compatible (scaled {c.b_compat.scaled_max:.2e})")
            src = c.b
        fr = eigenframe(src.values, c.pack.g.values)
        if fr.degenerate:
            raise Skip(f"degenerate eigenvalues (gap {fr.min_gap:.2e})")
        c._frame = fr
    return c._frame


@_check("purity", "ds_check", "Thm1", ONE_DERIV, _riemannian)
def _c_ds(c):
    r = ds_check(c.pack.riemann_lower.values, _frame(c))
    if not r.applicable:
        raise Skip(r.detail.get("reason", "no admissible triple"))
    return r


@_check("purity", "certificate", "Thm6", ONE_DERIV, _riemannian)
def _c_pure(c):
    return purity_certificate(c.pack.riemann_lower.values, _frame(c)).as_residual()


@_check("purity", "pontryagin4", "Maillot", ALGEBRAIC, _all(_riemannian, _need_dim(lo=4)))
def _c_pont(c):
    fr = _frame(c)
    cert = purity_certificate(c.pack.riemann_lower.values, fr)
    if not cert.pure(ONE_DERIV):
        raise Skip("curvature is not pure in this frame")
    return pontryagin_frame_residual(c.pack.riemann.values, fr)


# -- geodesic ------------------------------------------------------------------

@_check("geodesic", "invariance", "geodesic-Prop", ALGEBRAIC)
def _c_invariance(c):
    return invariance_residual(c.pack.riemann, c.random_symmetric(), c.random_symmetric())


@_check("geodesic", "X_closedness", "Riemgeod", EXACT, _need_field("X"))
def _c_closed(c):
    d = deformation(c.pack, c.fields["X"])
    return worst(d.closedness, d.symmetry)


def _pair(c: PointContext):
    if not hasattr(c, "_pair"):
        from .catalog import Fixture

        fx = Fixture("pair", c.metric, {"gbar": c.fields["gbar"], "X": c.fields["X"]})
        c._pair = pair_checks(fx, c.point)
    return c._pair


for _name, _anchor, _tol in (("geog", "geog", ONE_DERIV), ("x_recovery", "Riemgeod", ALGEBRAIC),
                             ("link", "Riemgeod", ALGEBRAIC), ("mapped_flatness", "Riemgeod", ONE_DERIV),
                             ("gbar_compat", "geodesic-Corollary", ONE_DERIV)):
    _check("geodesic", f"pair.{_name}", _anchor, _tol, _need_field("X", "gbar"))(
        lambda c, _name=_name: getattr(_pair(c), _name))


# -- gr ------------------------------------------------------------------------

@_check("gr", "einstein_trace", "GR", EXACT, _lorentzian4)
def _c_einstein(c):
    md = stress_from_einstein(c.pack)
    return worst(md.einstein, md.trace_relation)


@_check("gr", "divC_matter", "GR-divC", ONE_DERIV, _lorentzian4)
def _c_divc(c):
    return weyl_divergence_matter_residual(c.pack)


@_check("gr", "bianchi_like", "GR-bianchi-like", TWO_DERIV, _lorentzian4)
def _c_bianchi_like(c):
    return weyl_compat_and_bianchi_like(c.pack)[0]


def _static_u(c: PointContext):
    if not is_static(c.pack):
        raise Skip("metric is not static in coordinate 0 here")
    g = c.pack.g.values
    u = np.zeros(4)
    u[0] = 1.0 / np.sqrt(-g[0, 0])
    return u


@_check("gr", "H_static", "GR-EH", ONE_DERIV, _lorentzian4)
def _c_h_static(c):
    u = _static_u(c)
    C = weyl_lower_value(c.pack)
    eh = eh_decompose(C, c.pack.g.values, u=u)
    scale = max(1.0, float(np.abs(C).max()))
    return Residual("H_static", "GR-EH", eh.H, scale)


@_check("gr", "E_transverse", "GR-EH", ALGEBRAIC, _lorentzian4)
def _c_e_trans(c):
    u = _static_u(c)
    eh = eh_decompose(weyl_lower_value(c.pack), c.pack.g.values, u=u)
    return worst(*eh.residuals(u=u).values())


def _weyl_compatible_T(c: PointContext):
    T = stress_from_einstein(c.pack).T.values
    C = weyl_lower_value(c.pack)
    r = weyl_compat_point(T, C, c.pack.g.values)
    if not r.ok(EXACT):
        raise Skip(f"T is not Weyl-compatible here (scaled {r.scaled_max:.2e})")
    return T, C


@_check("gr", "generalized_H", "GR-EH", ALGEBRAIC, _lorentzian4)
def _c_gen_h(c):
    T, C = _weyl_compatible_T(c)
    eh = eh_decompose(C, c.pack.g.values, T=T)
    scale = max(1.0, float(np.abs(C).max()) * max(1.0, float(np.abs(T).max())))
    return Residual("generalized_H", "GR-EH", eh.H, scale)


@_check("gr", "cring_commutes", "GR-Cring", ALGEBRAIC, _lorentzian4)
def _c_cring(c):
    T, C = _weyl_compatible_T(c)
    return cring_commutes(T, C, c.pack.g.values)


# -- running -------------------------------------------------------------------

PASS, FAIL, SKIPPED, ERRORED = "pass", "fail", "skipped", "errored"


@dataclass(frozen=True)
class CheckReport:
    check_id: str
    anchor: str
    points: int
    max_scaled_residual: float | None
    tolerance: float
    passed: bool | None
    status: str
    residuals: tuple = ()
    skipped_points: int = 0
    reason: str | None = None
    error_kind: str | None = None

    def to_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "anchor": self.anchor,
            "points": self.points,
            "skipped_points": self.skipped_points,
            "max_scaled_residual": self.max_scaled_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "status": self.status,
            "reason": self.reason,
            "residuals": list(self.residuals),
        }


@dataclass(frozen=True)
class SuiteReport:
    metric: str
    seed: int
    points: int
    suites: tuple[str, ...]
    checks: tuple[CheckReport, ...]
    version: str = __version__
    fields: tuple[str, ...] = ()

    @property
    def ok(self) -> bool:
        return all(c.status in (PASS, SKIPPED) for c in self.checks)

    @property
    def domain_error(self) -> bool:
        return any(c.error_kind == "domain" for c in self.checks)

    def by_id(self) -> dict[str, CheckReport]:
        return {c.check_id: c for c in self.checks}

    def to_dict(self) -> dict:
        return {
            "tool": "riemcompat",
            "version": self.version,
            "metric": self.metric,
            "seed": self.seed,
            "points": self.points,
            "suites": list(self.suites),
            "fields": list(self.fields),
            "checks": [c.to_dict() for c in self.checks],
        }

    def to_json(self) -> str:
        return to_json(self.to_dict()) + "\n"

    def summary_lines(self) -> list[str]:
        out = []
        for c in self.checks:
            res = "-" if c.max_scaled_residual is None else f"{c.max_scaled_residual:.3e}"
            extra = f"  ({c.reason})" if c.reason else ""
            out.append(f"{c.status.upper():8s} {c.check_id:32s} [{c.anchor}] max={res} tol={c.tolerance:.0e} n={c.points}{extra}")
        return out


def _fmt_float(x: float) -> str:
    if not np.isfinite(x):
        return "null"
    s = format(float(x), ".17g")
    if "." not in s and "e" not in s and "n" not in s:
        s += ".0"
    return s


def to_json(obj, indent: int = 0) -> str:
    """JSON with fixed key order and 17-significant-digit floats."""
    pad, inner = "  " * indent, "  " * (indent + 1)
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _fmt_float(obj)
    if isinstance(obj, str):
        import json

        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{inner}{to_json(str(k))}: {to_json(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + pad + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list, tuple)) for v in obj):
            return "[" + ", ".join(to_json(v) for v in obj) + "]"
        return "[\n" + ",\n".join(inner + to_json(v, indent + 1) for v in obj) + "\n" + pad + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def checks_for(suites) -> list[Check]:
    out = []
    for s in suites:
        if s not in _REGISTRY:
            raise InputError(f"unknown suite {s!r}; expected a subset of {SUITES}")
        out.extend(_REGISTRY[s])
    return sorted(out, key=lambda c: c.id)


def parse_suites(spec: str | None) -> tuple[str, ...]:
    if spec is None or spec == "all":
        return SUITES
    names = tuple(dict.fromkeys(s.strip() for s in spec.split(",") if s.strip()))
    checks_for(names)
    return names


def _evaluate(check: Check, ctx: PointContext):
    """``('ok', residual) | ('skip', reason) | ('error', (kind, message))``."""
    try:
        return "ok", check.run(ctx)
    except Skip as s:
        return "skip", str(s)
    except DegenerateFrame as e:
        return "skip", str(e)
    except (DomainError, SingularMetric, FloatingPointError, ZeroDivisionError) as e:
        return "error", ("domain", f"{type(e).__name__}: {e}")
    except RiemCompatError as e:
        return "error", ("input", f"{type(e).__name__}: {e}")


def _run_point(checks, ctx):
    # numpy warnings become domain errors so they never hide in the report
    with np.errstate(divide="raise", invalid="raise", over="raise"):
        return [_evaluate(ch, ctx) for ch in checks]


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("THREADS", "1")))
    except ValueError:
        return 1


def run_suite(metric: ChartedMetric, suites=SUITES, points: int = 10, seed: int = 0,
              tol: float | None = None, fields: dict[str, TensorField] | None = None) -> SuiteReport:
    """Evaluate the checks of ``suites`` at ``points`` seeded sample points."""
    fields = dict(fields or {})
    for name, f in fields.items():
        if f.coords != metric.coords:
            raise InputError(f"field {name!r} coordinates {f.coords} differ from the metric's {metric.coords}")
    suites = parse_suites(",".join(suites)) if not isinstance(suites, str) else parse_suites(suites)
    checks = checks_for(suites)
    active, static_skip = [], {}
    for ch in checks:
        reason = ch.applies(metric, fields)
        if reason:
            static_skip[ch.id] = reason
        else:
            active.append(ch)
    pts = sample_points(metric, points, seed)
    ctxs = [PointContext(metric, p, i, seed, fields) for i, p in enumerate(pts)]
    nthreads = _threads()
    if nthreads > 1 and len(ctxs) > 1:
        with ThreadPoolExecutor(nthreads) as ex:
            results = list(ex.map(lambda c: _run_point(active, c), ctxs))
    else:
        results = [_run_point(active, c) for c in ctxs]

    reports = []
    for ch in checks:
        t = ch.tol if tol is None else float(tol)
        if ch.id in static_skip:
            reports.append(CheckReport(ch.id, ch.anchor, 0, None, t, None, SKIPPED, reason=static_skip[ch.id]))
            continue
        j = active.index(ch)
        vals, skips, errors = [], [], []
        for per_point in results:
            kind, payload = per_point[j]
            if kind == "ok":
                vals.append(payload.scaled_max if payload.applicable else None)
                if not payload.applicable:
                    skips.append(payload.detail.get("reason", "not applicable"))
            elif kind == "skip":
                vals.append(None)
                skips.append(payload)
            else:
                vals.append(None)
                errors.append(payload)
        got = [v for v in vals if v is not None]
        worst_val = max(got) if got else None
        if errors:
            kinds = {k for k, _ in errors}
            reports.append(CheckReport(ch.id, ch.anchor, len(got), worst_val, t, False, ERRORED, tuple(vals),
                                       len(skips), errors[0][1], "domain" if "domain" in kinds else "input"))
        elif not got:
            reports.append(CheckReport(ch.id, ch.anchor, 0, None, t, None, SKIPPED, tuple(vals), len(skips), skips[0]))
        else:
            ok = worst_val <= t
            reason = f"skipped at {len(skips)} point(s): {skips[0]}" if skips else None
            reports.append(CheckReport(ch.id, ch.anchor, len(got), worst_val, t, ok, PASS if ok else FAIL,
                                       tuple(vals), len(skips), reason))
    return SuiteReport(metric.name, seed, points, tuple(suites), tuple(reports), fields=tuple(sorted(fields)))
