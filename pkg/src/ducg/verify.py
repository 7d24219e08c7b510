"""Retrospective verification of diagnostic precision against a case corpus.

For every disease of the model, up to ``cap`` qualified case records are
drawn by seeded sampling without replacement, each is diagnosed from its
recorded observations, and a case counts as correct exactly when the
top-ranked disease matches the recorded one (optionally top-k).  Diseases
without qualified records are reported as skipped rather than silently
dropped, and the cap keeps common diseases from masking rare ones in the
overall precision.

Sampling is reproducible: records are pre-sorted by ``record_id``, diseases
are processed in ascending id order, and draws come from Python's
Mersenne-Twister ``random.Random(seed)`` via ``sample()``.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass

from .errors import ModelFormatError
from .evidence import EvidenceSet
from .inference import suspicion
from .model import ChiefComplaintModel, VariableId

SUPPORTED_FORMAT_VERSION = "1"


@dataclass
class CaseRecord:
    record_id: str
    chief_complaint: str
    observations: list[tuple[VariableId, int]]
    true_disease: VariableId | None
    qualified: bool
    reason: str = ""


@dataclass(frozen=True)
class DiseaseRow:
    disease: str
    n_tested: int
    n_correct: int
    precision: float | None
    skipped: bool


@dataclass
class VerificationReport:
    rows: list[DiseaseRow]
    total_tested: int
    total_correct: int
    seed: int
    cap: int
    top_k: int = 1
    empty: bool = False

    @property
    def precision(self) -> float | None:
        if self.total_tested == 0:
            return None
        return self.total_correct / self.total_tested

    def to_dict(self) -> dict:
        return {
            "per_disease": [
                {
                    "disease": r.disease,
                    "n_tested": r.n_tested,
                    "n_correct": r.n_correct,
                    "precision": r.precision,
                    "skipped": r.skipped,
                }
                for r in self.rows
            ],
            "overall": {
                "total_tested": self.total_tested,
                "total_correct": self.total_correct,
                "precision": self.precision,
            },
            "seed": self.seed,
            "cap": self.cap,
            "top_k": self.top_k,
            "empty": self.empty,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "VerificationReport":
        rows = [
            DiseaseRow(
                disease=r["disease"],
                n_tested=r["n_tested"],
                n_correct=r["n_correct"],
                precision=r["precision"],
                skipped=r["skipped"],
            )
            for r in data["per_disease"]
        ]
        return cls(
            rows=rows,
            total_tested=data["overall"]["total_tested"],
            total_correct=data["overall"]["total_correct"],
            seed=data["seed"],
            cap=data["cap"],
            top_k=data.get("top_k", 1),
            empty=data.get("empty", False),
        )


def _resolve_disease(model: ChiefComplaintModel, spec: dict) -> tuple[VariableId | None, str]:
    if "disease_id" in spec:
        try:
            vid = VariableId.parse(str(spec["disease_id"]))
        except ValueError:
            return None, f"malformed disease id {spec['disease_id']!r}"
        if vid in model.diseases:
            return vid, ""
        return None, f"disease {spec['disease_id']} not in model"
    if "icd" in spec:
        code = str(spec["icd"])
        for vid, attrs in sorted(model.diseases.items()):
            if code in attrs.icd_codes:
                return vid, ""
        return None, f"ICD code {code} not in model"
    return None, "true_disease needs disease_id or icd"


def ingest(path, model: ChiefComplaintModel) -> list[CaseRecord]:
    """Parse a case corpus; records that cannot be resolved become unqualified."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ModelFormatError(f"invalid JSON at line {exc.lineno}: {exc.msg}", str(path))
    if not isinstance(data, dict):
        raise ModelFormatError("corpus top level must be an object", str(path))
    version = data.get("format_version")
    if version != SUPPORTED_FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format_version {version!r}", "format_version")
    records: list[CaseRecord] = []
    for i, raw in enumerate(data.get("cases", [])):
        path_i = f"cases[{i}]"
        if "record_id" not in raw:
            raise ModelFormatError("missing record_id", path_i)
        observations: list[tuple[VariableId, int]] = []
        bad_obs = ""
        for j, obs in enumerate(raw.get("observations", [])):
            ref = obs.get("variable", {})
            try:
                vid = VariableId(str(ref["kind"]), int(ref["index"]))
            except (KeyError, ValueError, TypeError):
                raise ModelFormatError("malformed variable", f"{path_i}.observations[{j}]")
            state = int(obs.get("state", 0))
            var = model.variables.get(vid)
            if var is None:
                bad_obs = f"unknown variable {vid}"
                continue
            if not 0 <= state < var.n_states:
                bad_obs = f"state {state} out of range for {vid}"
                continue
            observations.append((vid, state))
        disease, reason = _resolve_disease(model, raw.get("true_disease", {}))
        qualified = bool(raw.get("qualified", True))
        if disease is None:
            qualified = False
        elif bad_obs:
            reason = bad_obs
            qualified = False
        elif qualified and not any(s != 0 for _, s in observations):
            qualified = False
            reason = "no abnormal observation"
        records.append(
            CaseRecord(
                record_id=str(raw["record_id"]),
                chief_complaint=str(raw.get("chief_complaint", "")),
                observations=observations,
                true_disease=disease,
                qualified=qualified,
                reason=reason,
            )
        )
    return records


def diagnose_top(model: ChiefComplaintModel, record: CaseRecord, top_k: int) -> list[VariableId]:
    """Distinct diseases of the suspicion ranking, best first, up to top_k."""
    evidence = EvidenceSet.for_model(model, dict(record.observations))
    report = suspicion(model, evidence)
    out: list[VariableId] = []
    for entry in report.ranking():
        disease = entry.hypothesis[0]
        if disease not in out:
            out.append(disease)
        if len(out) >= top_k:
            break
    return out


def run_verification(
    model: ChiefComplaintModel,
    records: list[CaseRecord],
    cap: int = 10,
    seed: int = 0,
    top_k: int = 1,
) -> VerificationReport:
    rng = random.Random(seed)
    by_disease: dict[VariableId, list[CaseRecord]] = {vid: [] for vid in model.diseases}
    for record in records:
        if record.qualified and record.true_disease is not None:
            by_disease.setdefault(record.true_disease, []).append(record)

    rows: list[DiseaseRow] = []
    total_tested = 0
    total_correct = 0
    for disease in sorted(model.diseases):
        pool = sorted(by_disease.get(disease, []), key=lambda r: r.record_id)
        if not pool:
            rows.append(DiseaseRow(str(disease), 0, 0, None, skipped=True))
            continue
        n = min(cap, len(pool))
        chosen = rng.sample(pool, n) if n < len(pool) else list(pool)
        correct = 0
        for record in sorted(chosen, key=lambda r: r.record_id):
            top = diagnose_top(model, record, top_k)
            if record.true_disease in top:
                correct += 1
        rows.append(DiseaseRow(str(disease), n, correct, correct / n, skipped=False))
        total_tested += n
        total_correct += correct
    return VerificationReport(
        rows=rows,
        total_tested=total_tested,
        total_correct=total_correct,
        seed=seed,
        cap=cap,
        top_k=top_k,
        empty=(total_tested == 0),
    )


def render_report(report: VerificationReport, format: str = "text") -> str:
    """Human table or exact machine JSON of a verification report."""
    if format == "machine":
        return json.dumps(report.to_dict(), indent=2, sort_keys=True)
    lines = []
    header = f"{'disease':<12} {'tested':>6} {'correct':>7} {'precision':>9}  skipped"
    lines.append(header)
    lines.append("-" * len(header))
    for row in report.rows:
        precision = "-" if row.precision is None else f"{row.precision * 100:.2f}%"
        skipped = "yes" if row.skipped else ""
        lines.append(
            f"{row.disease:<12} {row.n_tested:>6} {row.n_correct:>7} {precision:>9}  {skipped}"
        )
    lines.append("-" * len(header))
    overall = "-" if report.precision is None else f"{report.precision * 100:.2f}%"
    lines.append(
        f"{'overall':<12} {report.total_tested:>6} {report.total_correct:>7} {overall:>9}"
    )
    lines.append(f"cap={report.cap} seed={report.seed} top_k={report.top_k}")
    if report.empty:
        lines.append("warning: no qualified records were tested")
    return "\n".join(lines)
