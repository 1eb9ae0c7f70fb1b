"""Scenario runner with deterministic machine-readable reports.

Each scenario exercises one verified result on a configured layout/seed
and records every comparison as an assertion carrying both numbers.
Serialized reports are byte-stable for identical configs: keys are
sorted, floats are printed with 17 significant digits, and wall-clock
timings are kept on the in-memory report only (opt-in for emission,
since they are the one non-deterministic ingredient).
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import linalg
from .correlations import (
    SQRT2,
    BellReport,
    BellSettings,
    bell_correlation,
    canonical_max_violation,
    conditional_bell_correlation,
    contraction_from_projector,
    epr_projector_pair,
    seesaw_maximize,
    tsirelson_certificate,
    violate_conditional_bell,
)
from .linalg import expectation, random_hermitian
from .local_algebra import (
    LocalOperator,
    RegionLayout,
    VacuumModel,
    check_cyclic,
    check_separating,
    make_vacuum,
    random_projector,
    vacuum_positivity,
)
from .root_theorem import RootCertificate, prove_root_certificate

SCENARIOS = (
    "reeh-schlieder",
    "root-cert",
    "epr",
    "bell-max",
    "tsirelson-sweep",
    "cond-bell",
)

DEFAULT_TOLERANCES = {
    "hermitian": 1e-10,
    "eig_merge": 1e-10,
    "schmidt_rank": 1e-9,
    "projector_floor": 1e-12,
    "spectral_tau": 1e-12,
    "tsirelson_slack": 1e-9,
    "budget_check": 1e-9,
}


class ConfigError(ValueError):
    """Invalid scenario configuration; names the offending field."""

    def __init__(self, config_field: str, message: str):
        self.field = config_field
        super().__init__(f"config field '{config_field}': {message}")


@dataclass(frozen=True)
class ScenarioConfig:
    scenario: str
    layout: tuple[int, ...]
    seed: int
    eps: float
    sweep: Optional[tuple[float, ...]] = None
    tolerances: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.scenario not in SCENARIOS:
            raise ConfigError(
                "scenario", f"{self.scenario!r} is not one of {', '.join(SCENARIOS)}"
            )
        try:
            layout = RegionLayout(tuple(self.layout))
        except ValueError as exc:
            raise ConfigError("layout", str(exc)) from exc
        object.__setattr__(self, "layout", layout.dims)
        if self.scenario == "cond-bell":
            d = layout.dims
            if len(d) != 3 or d[2] != d[0] * d[1]:
                raise ConfigError(
                    "layout", f"cond-bell needs d3 = d1*d2 on 3 slots, got {d}"
                )
        elif self.scenario == "reeh-schlieder":
            d = layout.dims
            if len(d) == 3 and d[2] != d[0] * d[1]:
                raise ConfigError(
                    "layout", f"3-slot vacuum needs d3 = d1*d2, got {d}"
                )
        elif len(layout.dims) != 2:
            raise ConfigError(
                "layout", f"scenario {self.scenario} runs on 2-slot layouts, got {layout.dims}"
            )
        if self.scenario in ("reeh-schlieder", "root-cert", "epr") and len(
            layout.dims
        ) == 2 and layout.dims[0] != layout.dims[1]:
            # These scenarios build a vacuum, which needs matching dims.
            raise ConfigError("layout", f"2-slot vacuum needs d1 = d2, got {layout.dims}")
        if not isinstance(self.seed, int):
            raise ConfigError("seed", f"expected an integer, got {self.seed!r}")
        if not (isinstance(self.eps, (int, float)) and self.eps > 0):
            raise ConfigError("eps", f"expected a positive number, got {self.eps!r}")
        if self.sweep is not None:
            sweep = tuple(float(e) for e in self.sweep)
            if not sweep:
                raise ConfigError("sweep", "sweep list must be non-empty")
            if any(e <= 0 for e in sweep):
                raise ConfigError("sweep", f"entries must be strictly positive: {sweep}")
            if any(b >= a for a, b in zip(sweep, sweep[1:])):
                raise ConfigError("sweep", f"entries must be strictly decreasing: {sweep}")
            object.__setattr__(self, "sweep", sweep)
        unknown = set(self.tolerances) - set(DEFAULT_TOLERANCES)
        if unknown:
            raise ConfigError("tolerances", f"unknown names: {sorted(unknown)}")

    @classmethod
    def from_dict(cls, data: dict) -> "ScenarioConfig":
        allowed = {"scenario", "layout", "seed", "eps", "sweep", "tolerances"}
        unknown = set(data) - allowed
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown config field")
        if "scenario" not in data:
            raise ConfigError("scenario", "missing")
        if "layout" not in data:
            raise ConfigError("layout", "missing")
        return cls(
            scenario=data["scenario"],
            layout=tuple(data["layout"]),
            seed=int(data.get("seed", 0)),
            eps=float(data.get("eps", 0.01)),
            sweep=tuple(data["sweep"]) if data.get("sweep") else None,
            tolerances=dict(data.get("tolerances", {})),
        )

    def tolerance(self, name: str) -> float:
        return float(self.tolerances.get(name, DEFAULT_TOLERANCES[name]))

    def region_layout(self) -> RegionLayout:
        return RegionLayout(self.layout)

    def to_payload(self) -> dict:
        return {
            "scenario": self.scenario,
            "layout": list(self.layout),
            "seed": self.seed,
            "eps": self.eps,
            "sweep": list(self.sweep) if self.sweep else None,
            "tolerances": {k: self.tolerance(k) for k in sorted(DEFAULT_TOLERANCES)},
        }


@dataclass
class RunReport:
    config: ScenarioConfig
    assertions: list[dict]
    certificates: dict
    timings: dict[str, float]

    @property
    def passed(self) -> bool:
        return all(a["passed"] for a in self.assertions)

    def to_payload(self, include_timings: bool = False) -> dict:
        return {
            "schema": 1,
            "config": self.config.to_payload(),
            "assertions": self.assertions,
            "certificates": self.certificates,
            "timings": dict(self.timings) if include_timings else {},
        }


_OPS = {
    "<": lambda a, b: a < b,
    "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b,
    ">=": lambda a, b: a >= b,
    "==": lambda a, b: a == b,
}


def _record(assertions: list, name: str, lhs: float, op: str, rhs: float) -> bool:
    passed = bool(_OPS[op](lhs, rhs))
    assertions.append(
        {"name": name, "lhs": float(lhs), "op": op, "rhs": float(rhs), "passed": passed}
    )
    return passed


# ---------------------------------------------------------------------------
# payload helpers

def _matrix_payload(m: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m)]


def _vector_payload(v: np.ndarray) -> list:
    return [[float(x.real), float(x.imag)] for x in np.asarray(v).ravel()]


def _local_op_payload(op: LocalOperator) -> dict:
    return {"slots": list(op.slots), "matrix": _matrix_payload(op.matrix)}


def certificate_payload(cert: RootCertificate) -> dict:
    return {
        "target_k": cert.target_k,
        "requested_eps": cert.requested_eps,
        "p_max": _local_op_payload(cert.p_max),
        "p_min": _local_op_payload(cert.p_min),
        "lhs_max": cert.lhs_max,
        "rhs_max": cert.rhs_max,
        "lhs_min": cert.lhs_min,
        "rhs_min": cert.rhs_min,
        "budget": {
            "eps1": cert.budget.eps1,
            "eps2": cert.budget.eps2,
            "eps3": cert.budget.eps3,
            "eps4": cert.budget.eps4,
            "eps5": cert.budget.eps5,
            "norm_a": cert.budget.norm_a,
            "q_norm": cert.budget.q_norm,
            "q_expect": cert.budget.q_expect,
            "eps4_tilde": cert.budget.eps4_tilde,
        },
        "weights": list(cert.weights),
        "achieved": dict(cert.achieved),
    }


def bell_report_payload(rep: BellReport) -> dict:
    payload = {
        "settings": {
            "a1": _local_op_payload(rep.settings.a1),
            "a2": _local_op_payload(rep.settings.a2),
            "b1": _local_op_payload(rep.settings.b1),
            "b2": _local_op_payload(rep.settings.b2),
        },
        "state": _vector_payload(rep.state),
        "correlation": rep.correlation,
        "tsirelson_margin": rep.tsirelson_margin,
        "conditional": None,
    }
    if rep.conditional is not None:
        payload["conditional"] = {
            "p3": _local_op_payload(rep.conditional.p3),
            "p3_expect": rep.conditional.p3_expect,
            "conditional_correlation": rep.conditional.conditional_correlation,
            "certificate": certificate_payload(rep.conditional.certificate)
            if rep.conditional.certificate is not None
            else None,
        }
    return payload


# ---------------------------------------------------------------------------
# scenarios

def _random_state(dim: int, rng: np.random.Generator) -> np.ndarray:
    psi = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return psi / np.linalg.norm(psi)


def _scenario_reeh_schlieder(cfg: ScenarioConfig) -> tuple[list, dict]:
    layout = cfg.region_layout()
    v = make_vacuum(layout, cfg.seed)
    rank_tol = cfg.tolerance("schmidt_rank")
    assertions: list = []
    regions = [(s,) for s in range(layout.n_slots)]
    if layout.n_slots == 3:
        regions.append((0, 1))
    for region in regions:
        rank = linalg.schmidt_rank(v.omega, layout.dims, region, rank_tol)
        name = "+".join(str(s) for s in region)
        _record(assertions, f"separating_rank_slot_{name}", rank, "==",
                layout.region_dim(region))
        comp_dim = layout.region_dim(layout.complement(region))
        if layout.region_dim(region) == comp_dim:
            # Cyclicity is attainable exactly when the region matches its
            # complement in dimension.
            _record(assertions, f"cyclic_rank_slot_{name}", rank, "==", comp_dim)
    for slot in range(layout.n_slots):
        proj = random_projector(layout, slot, 1, cfg.seed + slot)
        val = vacuum_positivity(v, proj)
        _record(assertions, f"vacuum_positivity_slot_{slot}", val, ">", 0.0)
    # The explicit annihilator counterexample: a product state is not
    # separating for any slot.
    product = np.zeros(layout.total_dim, dtype=complex)
    product[0] = 1.0
    counter = VacuumModel.from_vector(layout, product)
    rank = linalg.schmidt_rank(counter.omega, layout.dims, (0,), rank_tol)
    _record(assertions, "product_state_rank_deficit", rank, "<", layout.dims[0])
    certificates = {
        "certified_ranks": {"+".join(map(str, k)): int(r)
                            for k, r in v.certified_ranks.items()}
    }
    return assertions, certificates


def _scenario_root_cert(cfg: ScenarioConfig, eps: Optional[float] = None
                        ) -> tuple[list, dict, RootCertificate]:
    layout = cfg.region_layout()
    eps = cfg.eps if eps is None else eps
    v = make_vacuum(layout, cfg.seed)
    rng = np.random.default_rng(cfg.seed)
    a = LocalOperator(1, random_hermitian(layout.dims[1], rng))
    psi = _random_state(layout.total_dim, rng)
    cert = prove_root_certificate(a, psi, v, (0,), eps,
                                  tau=cfg.tolerance("spectral_tau"))
    assertions: list = []
    _record(assertions, "root_max_inequality", cert.lhs_max, ">", cert.rhs_max)
    _record(assertions, "root_min_inequality", cert.lhs_min, "<", cert.rhs_min)
    _record(assertions, "weights_sum", abs(sum(cert.weights) - 1.0), "<=", 1e-9)
    budget_tol = cfg.tolerance("budget_check")
    bounds = {
        "cyclic_residual": cert.budget.eps1,
        "normalized_error": cert.budget.eps2,
        "window_error": cert.budget.eps3,
        "decomposition_residual": cert.budget.eps4_tilde,
        "rescale_error": cert.budget.eps4,
        "combined_error": cert.budget.eps5,
    }
    for name, bound in bounds.items():
        _record(assertions, f"budget_{name}", cert.achieved[name], "<=",
                bound + budget_tol)
    return assertions, {"root_certificate": certificate_payload(cert)}, cert


def _scenario_epr(cfg: ScenarioConfig) -> tuple[list, dict]:
    layout = cfg.region_layout()
    v = make_vacuum(layout, cfg.seed)
    p2 = random_projector(layout, 1, 1, cfg.seed)
    _, report = epr_projector_pair(p2, v.omega, v, cfg.eps)
    assertions: list = []
    # <P1 P2> <= <P1> is exact (P1 P2 <= P1 as operators); compare the
    # difference against the floating-point noise floor.
    _record(assertions, "epr_upper",
            report.joint_expect - report.p1_expect, "<=", 1e-12)
    _record(assertions, "epr_lower_strict", report.joint_expect, ">", report.lower_bound)
    _record(assertions, "p1_vacuum_positivity", report.p1_expect, ">", 0.0)
    certificates = {
        "epr": {
            "p1": _local_op_payload(report.p1),
            "p2": _local_op_payload(p2),
            "p1_expect": report.p1_expect,
            "joint_expect": report.joint_expect,
            "lower_bound": report.lower_bound,
            "certificate": certificate_payload(report.certificate),
        }
    }
    return assertions, certificates


def _scenario_bell_max(cfg: ScenarioConfig) -> tuple[list, dict]:
    layout = cfg.region_layout()
    state, settings = canonical_max_violation(layout)
    value = bell_correlation(settings, state, layout)
    assertions: list = []
    _record(assertions, "canonical_upper", value, "<=", SQRT2 + 1e-9)
    _record(assertions, "canonical_lower", value, ">=", SQRT2 - 1e-9)
    best = -math.inf
    n_starts = 5
    for k in range(n_starts):
        _, beta = seesaw_maximize(state, layout, cfg.seed + k)
        _record(assertions, f"seesaw_ceiling_start_{k}", beta, "<=", SQRT2 + 1e-7)
        best = max(best, beta)
    _record(assertions, "seesaw_best", best, ">=", SQRT2 - 1e-6)
    report = BellReport(
        settings=settings, state=state, correlation=value,
        tsirelson_margin=tsirelson_certificate(settings, layout),
    )
    return assertions, {"bell": bell_report_payload(report)}


def _random_settings(layout: RegionLayout, rng: np.random.Generator) -> BellSettings:
    def contraction(slot: int) -> LocalOperator:
        d = layout.dims[slot]
        rank = int(rng.integers(1, d + 1))
        basis = linalg.haar_unitary(d, rng)[:, :rank]
        p = basis @ basis.conj().T
        return contraction_from_projector(LocalOperator(slot, 0.5 * (p + p.conj().T)))

    return BellSettings(
        a1=contraction(0), a2=contraction(0), b1=contraction(1), b2=contraction(1)
    )


def _scenario_tsirelson_sweep(cfg: ScenarioConfig) -> tuple[list, dict]:
    layout = cfg.region_layout()
    rng = np.random.default_rng(cfg.seed)
    slack = cfg.tolerance("tsirelson_slack")
    margins = []
    for _ in range(100):
        settings = _random_settings(layout, rng)
        margins.append(tsirelson_certificate(settings, layout))
    assertions: list = []
    _record(assertions, "tsirelson_min_margin", min(margins), ">=", -slack)
    _record(assertions, "tsirelson_samples", len(margins), "==", 100)
    return assertions, {"margins": {"min": min(margins), "max": max(margins)}}


def _scenario_cond_bell(cfg: ScenarioConfig) -> tuple[list, dict]:
    layout = cfg.region_layout()
    v = make_vacuum(layout, cfg.seed)
    report = violate_conditional_bell(layout, v, cfg.eps)
    cond = report.conditional
    assertions: list = []
    _record(assertions, "conditional_violation", cond.conditional_correlation,
            ">", SQRT2 - cfg.eps)
    recomputed = conditional_bell_correlation(report.settings, cond.p3, v)
    _record(assertions, "conditional_recompute",
            abs(recomputed - cond.conditional_correlation), "<=", 1e-9)
    _record(assertions, "tsirelson_margin", report.tsirelson_margin, ">=",
            -cfg.tolerance("tsirelson_slack"))
    return assertions, {"bell": bell_report_payload(report)}


def run_scenario(cfg: ScenarioConfig) -> RunReport:
    start = time.perf_counter()
    if cfg.scenario == "reeh-schlieder":
        assertions, certificates = _scenario_reeh_schlieder(cfg)
    elif cfg.scenario == "root-cert":
        assertions, certificates, _ = _scenario_root_cert(cfg)
    elif cfg.scenario == "epr":
        assertions, certificates = _scenario_epr(cfg)
    elif cfg.scenario == "bell-max":
        assertions, certificates = _scenario_bell_max(cfg)
    elif cfg.scenario == "tsirelson-sweep":
        assertions, certificates = _scenario_tsirelson_sweep(cfg)
    elif cfg.scenario == "cond-bell":
        assertions, certificates = _scenario_cond_bell(cfg)
    else:  # unreachable: the config validates the name
        raise ConfigError("scenario", f"unknown scenario {cfg.scenario!r}")
    timings = {"total_seconds": time.perf_counter() - start}
    return RunReport(cfg, assertions, certificates, timings)


# ---------------------------------------------------------------------------
# sweeps

SWEEP_COLUMNS = (
    "eps",
    "eps1", "eps2", "eps3", "eps4", "eps5",
    "cyclic_residual", "normalized_error", "window_error",
    "decomposition_residual", "rescale_error", "combined_error",
    "slack_max", "slack_min",
    "passed",
)


@dataclass
class SweepTable:
    config: ScenarioConfig
    rows: list[dict]

    @property
    def passed(self) -> bool:
        return all(r["passed"] for r in self.rows)

    def to_payload(self, include_timings: bool = False) -> dict:
        return {
            "schema": 1,
            "config": self.config.to_payload(),
            "columns": list(SWEEP_COLUMNS),
            "rows": self.rows,
        }


def sweep_eps(cfg: ScenarioConfig) -> SweepTable:
    """One root-cert pipeline run per sweep eps, in the given order."""
    if cfg.scenario != "root-cert":
        raise ConfigError("scenario", f"sweeps support root-cert only, got {cfg.scenario!r}")
    if not cfg.sweep:
        raise ConfigError("sweep", "missing eps list")
    rows = []
    for eps in cfg.sweep:
        assertions, _, cert = _scenario_root_cert(cfg, eps=eps)
        row = {
            "eps": eps,
            "eps1": cert.budget.eps1,
            "eps2": cert.budget.eps2,
            "eps3": cert.budget.eps3,
            "eps4": cert.budget.eps4,
            "eps5": cert.budget.eps5,
            **{k: cert.achieved[k] for k in (
                "cyclic_residual", "normalized_error", "window_error",
                "decomposition_residual", "rescale_error", "combined_error")},
            "slack_max": cert.lhs_max - cert.rhs_max,
            "slack_min": cert.rhs_min - cert.lhs_min,
            "passed": all(a["passed"] for a in assertions),
        }
        rows.append(row)
    return SweepTable(cfg, rows)


# ---------------------------------------------------------------------------
# deterministic serialization

def _format_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        raise ValueError(f"cannot serialize non-finite float {x}")
    return f"{x:.17g}"


def canonical_json(value) -> str:
    """JSON with sorted keys and floats at 17 significant digits."""
    if isinstance(value, dict):
        items = sorted(value.items())
        body = ",".join(f"{json.dumps(str(k))}:{canonical_json(v)}" for k, v in items)
        return "{" + body + "}"
    if isinstance(value, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in value) + "]"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return _format_float(float(value))
    if value is None:
        return "null"
    if isinstance(value, str):
        return json.dumps(value)
    raise TypeError(f"cannot serialize {type(value)!r}")


def _csv_cell(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return _format_float(float(value))
    return str(value)


def _report_csv(report: RunReport) -> str:
    lines = ["name,lhs,op,rhs,passed"]
    for a in report.assertions:
        lines.append(",".join([
            a["name"], _csv_cell(a["lhs"]), f'"{a["op"]}"',
            _csv_cell(a["rhs"]), _csv_cell(a["passed"]),
        ]))
    return "\n".join(lines) + "\n"


def _sweep_csv(table: SweepTable) -> str:
    lines = [",".join(SWEEP_COLUMNS)]
    for row in table.rows:
        lines.append(",".join(_csv_cell(row[c]) for c in SWEEP_COLUMNS))
    return "\n".join(lines) + "\n"


def render_report(report, fmt: str, include_timings: bool = False) -> str:
    if fmt == "json":
        return canonical_json(report.to_payload(include_timings=include_timings)) + "\n"
    if fmt == "csv":
        if isinstance(report, SweepTable):
            return _sweep_csv(report)
        return _report_csv(report)
    raise ValueError(f"unknown format {fmt!r} (expected json or csv)")


def emit_report(report, fmt: str, path, include_timings: bool = False) -> None:
    """Write a report; byte-identical output for identical inputs."""
    text = render_report(report, fmt, include_timings=include_timings)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write report to {path}: {exc}") from exc
