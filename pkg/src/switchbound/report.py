"""Report envelopes and deterministic serialization.

Structured output is canonical JSON (sorted keys, compact separators) so
identical inputs and seeds produce byte-identical documents. Converters
turn the analysis dataclasses into plain payload dictionaries; CSV export
covers trajectories and sweep tables.
"""
from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass

import numpy as np

from ._version import __version__
from .core import MatrixFamily, dump_family
from .desync import AsyncStabilityCertificate, DesyncBoundReport
from .dynamics import InstabilityWitness, JsrReport, OvershootReport, Trajectory
from .invariance import QCVerdict
from .measure import MeasureReport, StructuredBoundReport
from .robustness import LimitSuiteReport, PeakDemoReport, SweepTable


def sanitize(obj):
    """Convert analysis values to canonical JSON-ready structures."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        if np.isinf(v):
            return "inf" if v > 0 else "-inf"
        if np.isnan(v):
            return "nan"
        return v
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, complex):
        return {"re": sanitize(obj.real), "im": sanitize(obj.imag)}
    return obj


def canonical_json(payload) -> str:
    return json.dumps(sanitize(payload), sort_keys=True, separators=(",", ":")) + "\n"


def family_digest(family: MatrixFamily) -> str:
    return hashlib.sha256(dump_family(family).encode()).hexdigest()


def text_digest(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass(frozen=True)
class ReportEnvelope:
    """Machine-readable wrapper: every nondeterministic knob (seed, starts,
    grid) lives in parameters; module warnings surface unchanged."""

    command: str
    digest: str
    parameters: dict
    results: dict
    warnings: tuple = ()
    version: str = __version__

    def payload(self) -> dict:
        return {
            "command": self.command,
            "digest": self.digest,
            "parameters": sanitize(self.parameters),
            "results": sanitize(self.results),
            "warnings": [str(w) for w in self.warnings],
            "version": self.version,
        }

    def to_json(self) -> str:
        return canonical_json(self.payload())

    def to_text(self) -> str:
        lines = [f"# {self.command} (v{self.version})", f"input sha256: {self.digest}"]
        lines.extend(_text_block("parameters", sanitize(self.parameters)))
        lines.extend(_text_block("results", sanitize(self.results)))
        if self.warnings:
            lines.append("warnings:")
            for w in self.warnings:
                lines.append(f"  ! {w}")
        return "\n".join(lines) + "\n"


def _text_block(title: str, payload, indent: int = 0) -> list:
    pad = "  " * indent
    lines = [f"{pad}{title}:"]
    if isinstance(payload, dict):
        for k in sorted(payload):
            v = payload[k]
            if isinstance(v, (dict, list)) and v:
                lines.extend(_text_block(str(k), v, indent + 1))
            else:
                lines.append(f"{pad}  {k} = {_fmt(v)}")
    elif isinstance(payload, list):
        for i, v in enumerate(payload):
            if isinstance(v, (dict, list)) and v:
                lines.extend(_text_block(f"[{i}]", v, indent + 1))
            else:
                lines.append(f"{pad}  [{i}] = {_fmt(v)}")
    else:
        lines.append(f"{pad}  {_fmt(payload)}")
    return lines


def _fmt(v) -> str:
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, list):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def parse_report(text: str) -> dict:
    return json.loads(text)


# ---------------------------------------------------------------------------
# Payload converters.
# ---------------------------------------------------------------------------


def qc_payload(verdict: QCVerdict) -> dict:
    out: dict = {"status": verdict.status.value}
    if verdict.certificate is not None:
        out["certificate"] = verdict.certificate
        out["certificate_dim"] = int(verdict.certificate.shape[1])
    if verdict.seeds:
        out["seeds"] = [
            {"member": int(m), "eigenvalue": complex(lam)} for m, lam in verdict.seeds
        ]
    if verdict.note:
        out["note"] = verdict.note
    return out


def measure_payload(rep: MeasureReport) -> dict:
    out = {
        "p": rep.p,
        "norm": rep.norm.value,
        "sigma_upper": rep.sigma_upper,
        "sigma_lower": rep.sigma_lower,
        "argmin": rep.argmin,
        "lipschitz": rep.lipschitz,
        "starts": {
            "random": rep.starts.random,
            "basis": rep.starts.basis,
            "extra": rep.starts.extra,
            "evaluations": rep.starts.evaluations,
        },
    }
    if rep.grid is not None:
        out["grid"] = {
            "mesh": rep.grid.mesh,
            "points": rep.grid.points,
            "escalations": rep.grid.escalations,
            "fast_path": rep.grid.fast_path,
            "max_depth": rep.grid.max_depth,
        }
        if rep.grid.note:
            out["grid"]["note"] = rep.grid.note
    return out


def jsr_payload(rep: JsrReport) -> dict:
    out = {
        "depth": rep.depth,
        "lower": rep.lower,
        "upper": rep.upper,
        "verdict": rep.verdict,
        "lower_word": list(rep.lower_word),
        "upper_level": rep.upper_level,
    }
    if rep.stable_chi_bound is not None:
        out["stable_chi_bound"] = rep.stable_chi_bound
    return out


def overshoot_payload(rep: OvershootReport) -> dict:
    out: dict = {"T": rep.T}
    if rep.chi_T is not None:
        out["chi_T"] = rep.chi_T
        out["witness_word"] = list(rep.witness_word)
    if rep.apriori_bound is not None:
        out["apriori_bound"] = rep.apriori_bound
        out["conditional"] = rep.conditional
    if rep.sigma is not None:
        out["sigma"] = measure_payload(rep.sigma)
    if rep.jsr is not None:
        out["jsr"] = jsr_payload(rep.jsr)
    return out


def structured_bound_payload(rep: StructuredBoundReport) -> dict:
    out = {
        "formula": rep.formula,
        "alpha": rep.alpha,
        "beta": rep.beta,
        "bound": rep.bound,
        "status": rep.status.value,
    }
    if rep.reason:
        out["reason"] = rep.reason
    return out


def async_certificate_payload(cert: AsyncStabilityCertificate) -> dict:
    out = {
        "certified": cert.certified,
        "rho_abs_upper": cert.rho_abs_upper,
        "level": cert.level,
    }
    if cert.contraction is not None:
        out["contraction"] = cert.contraction
    return out


def desync_bound_payload(rep: DesyncBoundReport) -> dict:
    return {
        "model": rep.model,
        "structured": structured_bound_payload(rep.structured),
        "bound": rep.bound,
        "jsr": jsr_payload(rep.jsr),
        "async_certificate": async_certificate_payload(rep.async_certificate),
        "conditional": rep.conditional,
    }


def witness_payload(w: InstabilityWitness) -> dict:
    return {
        "mu": w.mu,
        "expander_word": list(w.expander_word),
        "kappa": w.kappa,
        "growth_rate": w.growth_rate,
        "boundaries": list(w.boundaries),
        "block_lengths": [len(b) for b in w.block_words],
        "sigma_lower": w.sigma_lower,
        "steps": len(w.trajectory.word),
        "final_norm": float(w.trajectory.norms()[-1]),
    }


def trajectory_payload(traj: Trajectory) -> dict:
    return {
        "steps": len(traj.word),
        "word": list(traj.word),
        "norm": traj.norm.value,
        "peak": traj.peak,
        "peak_index": traj.peak_index,
        "final_norm": float(traj.norms()[-1]),
        "states": traj.states,
    }


def trajectory_csv(traj: Trajectory) -> str:
    """Columns: n, i(n) applied at step n (blank on the final row), state
    components, and the state norm."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    dim = traj.states.shape[1]
    writer.writerow(["n", "i"] + [f"x{j}" for j in range(dim)] + ["norm"])
    norms = traj.norms()
    for k, state in enumerate(traj.states):
        idx = traj.word[k] if k < len(traj.word) else ""
        writer.writerow([k, idx] + [repr(float(v)) for v in state] + [repr(float(norms[k]))])
    return buf.getvalue()


def sweep_payload(table: SweepTable) -> dict:
    return {
        "kind": table.kind,
        "description": table.description,
        "p": table.p,
        "T": table.T,
        "seed": table.seed,
        "columns": table.columns(),
        "rows": [sanitize(row) for row in table.as_rows()],
    }


def sweep_csv(table: SweepTable) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    cols = table.columns()
    writer.writerow(cols)
    for row in table.as_rows():
        writer.writerow(
            [repr(v) if isinstance(v, float) else ("" if v is None else v) for v in row]
        )
    return buf.getvalue()


def limit_suite_payload(rep: LimitSuiteReport) -> dict:
    return {
        "T": rep.T,
        "rows": [
            {
                "m": r.m,
                "rho_shear": r.rho_shear,
                "chi_T_shear": r.chi_T_shear,
                "stable_shear": r.stable_shear,
                "rho_drift": r.rho_drift,
                "chi_inf_drift": r.chi_inf_drift,
                "argmax_drift": r.argmax_drift,
                "stable_drift": r.stable_drift,
                "qc_status": r.qc_status,
            }
            for r in rep.rows
        ],
        "limit_shear_chi_T": rep.limit_shear_chi_T,
        "limit_shear_qc": rep.limit_shear_qc,
        "limit_identity_chi": rep.limit_identity_chi,
        "limit_identity_qc": rep.limit_identity_qc,
    }


def peak_demo_payload(rep: PeakDemoReport) -> dict:
    return {
        "a": rep.a,
        "eps": rep.eps,
        "feedback": rep.feedback,
        "closed_loop": rep.closed_loop,
        "printed_variant": rep.printed_variant,
        "eigenvalue_moduli": list(rep.eigenvalue_moduli),
        "printed_variant_moduli": list(rep.printed_variant_moduli),
        "norm_l1": rep.norm_l1,
        "first_step_amplification": rep.first_step_amplification,
    }


def keyvalue_csv(payload: dict) -> str:
    """Flat key,value export for scalar-report commands."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])

    def walk(prefix: str, obj):
        if isinstance(obj, dict):
            for k in sorted(obj):
                walk(f"{prefix}.{k}" if prefix else str(k), obj[k])
        elif isinstance(obj, list):
            writer.writerow([prefix, json.dumps(sanitize(obj), sort_keys=True)])
        else:
            v = repr(float(obj)) if isinstance(obj, float) else obj
            writer.writerow([prefix, v])

    walk("", sanitize(payload))
    return buf.getvalue()
