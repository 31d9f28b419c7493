"""Formula families, corpus enumeration and the classical/antichain comparison runner."""

from __future__ import annotations

import itertools
import json
import random
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Iterator

from .automata import DEFAULT_STATE_BUDGET, ResourceLimitExceeded, decide_classical
from .engine import DEFAULT_TERM_BUDGET, decide_nested, normalize_prefix
from .formula import (
    And,
    Formula,
    Not,
    Or,
    PrenexFormula,
    Sing,
    Sub,
    Succ,
    Zeroth,
    close,
    desugar,
    parse_formula,
    pretty,
    to_prenex,
)

MODES = ("classical", "antichain", "both")
TASKS = ("validity", "satisfiability")


class ParameterError(ValueError):
    pass


# ---------------------------------------------------------------- families

def generate_family(name: str, n: int, k: int) -> str:
    """Text of a parameterised ground formula.

    ``chain``: a set ``Y`` such that no ascending chain ``X1 < ... < Xn``
    starting inside ``Y`` leaves it, with ``k`` negated existential blocks
    (the last block binds ``Xk .. Xn``).
    """
    if name != "chain":
        raise ParameterError(f"unknown family {name!r}")
    if n < 2:
        raise ParameterError("chain needs n >= 2")
    if not 1 <= k <= n - 1:
        raise ParameterError("chain needs 1 <= k <= n-1")
    xs = [f"X{i}" for i in range(1, n + 1)]
    quantifiers = [f"~ex2 {x}:" for x in xs[: k - 1]]
    quantifiers.append(f"~ex2 {', '.join(xs[k - 1:])}:")
    conjuncts = []
    for a, b in zip(xs, xs[1:]):
        # a sub Y & a strictly below b  ==>  b sub Y
        conjuncts.append(f"(~({a} sub Y & {a} sub {b} & ~{b} sub {a}) | {b} sub Y)")
    return "ex2 Y: " + " ".join(quantifiers) + " " + " & ".join(conjuncts)


def chain_grid(max_n: int = 4, max_k: int = 3) -> Iterator[tuple[str, str]]:
    for n in range(2, max_n + 1):
        for k in range(1, min(n - 1, max_k) + 1):
            yield f"chain-n{n}-k{k}", generate_family("chain", n, k)


# ---------------------------------------------------------------- exhaustive corpus

DEFAULT_VARIABLES = ("X", "Y", "Z")


def default_atom_pool(variables: tuple[str, ...] = DEFAULT_VARIABLES) -> list[Formula]:
    """One atom of each kind, spread over the variables."""
    v = list(variables) * 3
    return [Sub(v[0], v[1]), Sing(v[2]), Zeroth(v[1]), Succ(v[2], v[0])]


def matrices(pool: list[Formula], max_connectives: int = 3) -> list[Formula]:
    """Quantifier-free formulas over ``pool`` with at most ``max_connectives`` connectives.

    Double negations, idempotent pairs and commuted duplicates are skipped.
    """
    by_size: list[list[Formula]] = [list(pool)]
    for size in range(1, max_connectives + 1):
        level: list[Formula] = []
        seen: set[str] = set()

        def add(f: Formula) -> None:
            key = pretty(f)
            if key not in seen:
                seen.add(key)
                level.append(f)

        for f in by_size[size - 1]:
            if not isinstance(f, Not):
                add(Not(f))
        for left_size in range(size):
            right_size = size - 1 - left_size
            if left_size > right_size:
                break
            for i, a in enumerate(by_size[left_size]):
                rights = by_size[right_size][i + 1:] if left_size == right_size else by_size[right_size]
                for b in rights:
                    add(And((a, b)))
                    add(Or((a, b)))
        by_size.append(level)
    return [f for level in by_size for f in level]


def ordered_partitions(items: tuple[str, ...], max_blocks: int) -> Iterator[tuple[tuple[str, ...], ...]]:
    n = len(items)
    for blocks in range(1, min(n, max_blocks) + 1):
        for labels in itertools.product(range(blocks), repeat=n):
            if set(labels) != set(range(blocks)):
                continue
            yield tuple(tuple(x for x, lab in zip(items, labels) if lab == b) for b in range(blocks))


def prefixes(variables: tuple[str, ...] = DEFAULT_VARIABLES, max_blocks: int = 3):
    """Alternating prefixes binding every variable, in either starting polarity."""
    for parts in ordered_partitions(variables, max_blocks):
        for start in ("ex", "all"):
            other = "all" if start == "ex" else "ex"
            yield tuple((start if i % 2 == 0 else other, block) for i, block in enumerate(parts))


def exhaustive_corpus(
    variables: tuple[str, ...] = DEFAULT_VARIABLES,
    max_blocks: int = 3,
    max_connectives: int = 3,
    pool: list[Formula] | None = None,
) -> Iterator[tuple[str, Formula]]:
    pool = pool if pool is not None else default_atom_pool(variables)
    mats = matrices(pool, max_connectives)
    index = 0
    for prefix in prefixes(variables, max_blocks):
        for matrix in mats:
            f: Formula = matrix
            for q, block in reversed(prefix):
                f = PrenexFormula(((q, block),), f).to_formula()
            yield f"ex-{index:06d}", f
            index += 1


def sample_corpus(items: Iterable[tuple[str, Formula]], size: int, seed: int) -> list[tuple[str, Formula]]:
    items = list(items)
    if size >= len(items):
        return items
    chosen = random.Random(seed).sample(range(len(items)), size)
    return [items[i] for i in sorted(chosen)]


# ---------------------------------------------------------------- reports

@dataclass
class RunReport:
    formula_id: str
    task: str
    mode: str
    verdicts: dict[str, bool] = field(default_factory=dict)
    base_states: int = 0
    classical_states: int | None = None
    term_nodes: int | None = None
    iterations: list[int] = field(default_factory=list)
    time_ms: dict[str, float] = field(default_factory=dict)
    status: str = "ok"
    message: str = ""
    formula: str = ""

    @property
    def disagreement(self) -> bool:
        return len(set(self.verdicts.values())) > 1

    @property
    def verdict(self) -> bool | None:
        if not self.verdicts or self.disagreement:
            return None
        return next(iter(self.verdicts.values()))

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, data: dict) -> RunReport:
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> RunReport:
        return cls.from_dict(json.loads(text))


def prepare(f: Formula | str, task: str = "validity") -> PrenexFormula:
    if isinstance(f, str):
        f = parse_formula(f)
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    return to_prenex(desugar(close(f, task)))


def run_formula(
    f: Formula | str,
    formula_id: str = "formula",
    task: str = "validity",
    mode: str = "both",
    state_budget: int | None = DEFAULT_STATE_BUDGET,
    term_budget: int | None = DEFAULT_TERM_BUDGET,
    trace: list | None = None,
) -> RunReport:
    """Decide one formula in the requested mode(s).

    For the satisfiability task the verdict is whether the existential
    closure holds.  ``trace``, when given, receives the engine's iterates.
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    text = f if isinstance(f, str) else pretty(f)
    report = RunReport(formula_id, task, mode, formula=text)
    try:
        g = prepare(f, task)
        if mode in ("classical", "both"):
            c = decide_classical(g, state_budget)
            report.verdicts["classical"] = c.valid
            report.classical_states = c.total_states
            report.base_states = c.base_states
            report.time_ms["classical"] = c.time_ms
        if mode in ("antichain", "both"):
            spec = normalize_prefix(g)
            a = decide_nested(spec, term_budget, trace is not None)
            report.verdicts["antichain"] = a.valid
            report.term_nodes = a.term_nodes
            report.iterations = a.iterations
            report.base_states = a.base_states
            report.time_ms["antichain"] = a.time_ms
            if trace is not None:
                trace.extend(a.trace)
    except ResourceLimitExceeded as exc:
        report.status = "resource"
        report.message = str(exc)
        return report
    except Exception as exc:  # reported per formula so a sweep keeps going
        report.status = "error"
        report.message = f"{type(exc).__name__}: {exc}"
        return report
    if report.disagreement:
        report.status = "DISAGREEMENT"
    return report


# ---------------------------------------------------------------- comparison

@dataclass
class CorpusReport:
    reports: list[RunReport]

    @property
    def compared(self) -> list[RunReport]:
        return [r for r in self.reports if len(r.verdicts) == 2]

    @property
    def disagreements(self) -> list[RunReport]:
        return [r for r in self.reports if r.status == "DISAGREEMENT"]

    @property
    def failures(self) -> list[RunReport]:
        return [r for r in self.reports if r.status in ("error", "resource")]

    @property
    def agreement_rate(self) -> float:
        compared = self.compared
        if not compared:
            return 1.0
        return sum(not r.disagreement for r in compared) / len(compared)

    def ratios(self) -> list[float]:
        out = []
        for r in self.compared:
            if r.classical_states:
                out.append(r.term_nodes / r.classical_states)
        return out

    def summary(self) -> dict:
        ratios = self.ratios()
        return {
            "instances": len(self.reports),
            "compared": len(self.compared),
            "agreement_rate": self.agreement_rate,
            "disagreements": [r.formula_id for r in self.disagreements],
            "failures": [r.formula_id for r in self.failures],
            "mean_node_state_ratio": sum(ratios) / len(ratios) if ratios else None,
            "max_node_state_ratio": max(ratios) if ratios else None,
            "time_ms": {
                m: sum(r.time_ms.get(m, 0.0) for r in self.reports) for m in ("classical", "antichain")
            },
        }

    def table(self) -> list[dict]:
        """One row per formula with the columns of a timing/space comparison."""
        rows = []
        for r in self.reports:
            rows.append(
                {
                    "formula_id": r.formula_id,
                    "verdict": "" if r.verdict is None else ("valid" if r.verdict else "invalid"),
                    "status": r.status,
                    "base_states": r.base_states,
                    "classical_ms": round(r.time_ms.get("classical", float("nan")), 3),
                    "classical_states": r.classical_states,
                    "antichain_ms": round(r.time_ms.get("antichain", float("nan")), 3),
                    "term_nodes": r.term_nodes,
                    "iterations": " ".join(map(str, r.iterations)),
                }
            )
        return rows


def _run_item(args) -> RunReport:
    formula_id, f, task, mode, state_budget, term_budget = args
    return run_formula(f, formula_id, task, mode, state_budget, term_budget)


def compare_corpus(
    items: Iterable[tuple[str, Formula | str]],
    task: str = "validity",
    mode: str = "both",
    state_budget: int | None = DEFAULT_STATE_BUDGET,
    term_budget: int | None = DEFAULT_TERM_BUDGET,
    workers: int = 1,
) -> CorpusReport:
    jobs = [(fid, f, task, mode, state_budget, term_budget) for fid, f in items]
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(_run_item, jobs, chunksize=max(1, len(jobs) // (workers * 8))))
    else:
        reports = [_run_item(job) for job in jobs]
    reports.sort(key=lambda r: r.formula_id)
    return CorpusReport(reports)
