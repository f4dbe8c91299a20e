"""Shared test utilities: generators and brute-force oracles.

The oracles deliberately avoid the library's graph machinery: upward
reachability is computed by fixpoint edge relaxation over explicit edge
lists, and every similarity value follows straight from its definition.
"""

from __future__ import annotations

import math

import numpy as np

from gdapred.kg import build_kg
from gdapred.ontology import AnnotationMap, EntityId, Ontology, OntologyTerm


# ---------------------------------------------------------------------------
# generators


def random_ontology(rng: np.random.Generator, n_terms: int,
                    prefix: str = "HP") -> Ontology:
    """Random single-root DAG: every non-root picks 1-2 earlier parents."""
    ids = [f"{prefix}:{i:07d}" for i in range(n_terms)]
    terms = {tid: OntologyTerm(id=tid, label=f"term {i}")
             for i, tid in enumerate(ids)}
    edges: set[tuple[str, str, str]] = set()
    for i in range(1, n_terms):
        n_parents = min(int(rng.integers(1, 3)), i)
        for p in rng.choice(i, size=n_parents, replace=False):
            edges.add((ids[i], "is_a", ids[int(p)]))
    return Ontology(terms=terms, edges=edges, roots={ids[0]})


def random_annotations(rng: np.random.Generator, ontology: Ontology,
                       n_genes: int, n_diseases: int,
                       max_terms: int = 8) -> tuple[AnnotationMap, AnnotationMap]:
    term_ids = sorted(ontology.terms)
    gene_map = AnnotationMap()
    disease_map = AnnotationMap()
    for i in range(n_genes):
        k = int(rng.integers(1, max_terms + 1))
        chosen = rng.choice(len(term_ids), size=min(k, len(term_ids)), replace=False)
        gene_map.entries[EntityId(f"g{i}", "gene")] = {term_ids[int(c)] for c in chosen}
    for i in range(n_diseases):
        k = int(rng.integers(1, max_terms + 1))
        chosen = rng.choice(len(term_ids), size=min(k, len(term_ids)), replace=False)
        disease_map.entries[EntityId(f"d{i}", "disease")] = {term_ids[int(c)] for c in chosen}
    return gene_map, disease_map


def random_hp_kg(rng: np.random.Generator, n_terms: int, n_genes: int,
                 n_diseases: int, max_terms: int = 8):
    ontology = random_ontology(rng, n_terms)
    gene_map, disease_map = random_annotations(rng, ontology, n_genes,
                                               n_diseases, max_terms)
    kg = build_kg("HP", ontology, gene_hp=gene_map, disease_hp=disease_map)
    return kg, ontology, gene_map, disease_map


# ---------------------------------------------------------------------------
# brute-force oracles


def oracle_reachable_up(edges: set[tuple[str, str]], start: str) -> set[str]:
    """Fixpoint relaxation over (child, parent) edges; includes start."""
    reach = {start}
    changed = True
    while changed:
        changed = False
        for child, parent in edges:
            if child in reach and parent not in reach:
                reach.add(parent)
                changed = True
    return reach


def subclass_edges(kg) -> set[tuple[str, str]]:
    return {(s, o) for s, rel, o in kg.triples if rel == "subClassOf"}


def oracle_ic_seco(kg) -> dict[str, float]:
    terms = sorted(kg.term_nodes)
    edges = subclass_edges(kg)
    n = len(terms)
    values = {}
    for t in terms:
        descendants = sum(
            1 for other in terms
            if other != t and t in oracle_reachable_up(edges, other))
        values[t] = 1.0 - math.log(descendants + 1) / math.log(n)
    return values


def oracle_ic_resnik(kg, annotations: AnnotationMap) -> dict[str, float]:
    edges = subclass_edges(kg)
    n = len(annotations.entries)
    counts: dict[str, int] = {}
    for terms in annotations.entries.values():
        closure: set[str] = set()
        for t in terms:
            closure |= oracle_reachable_up(edges, t)
        for t in closure:
            counts[t] = counts.get(t, 0) + 1
    return {t: -math.log(c / n) for t, c in counts.items()}


def oracle_pair_sim(a: str, b: str, kg, ic: dict[str, float]) -> float:
    edges = subclass_edges(kg)
    common = oracle_reachable_up(edges, a) & oracle_reachable_up(edges, b)
    return max((ic[t] for t in common if t in ic), default=0.0)


def oracle_groupwise(gene_terms: set[str], disease_terms: set[str],
                     aggregation: str, kg, ic: dict[str, float]) -> float:
    edges = subclass_edges(kg)
    if aggregation == "SIMGIC":
        anc_a: set[str] = set()
        for t in gene_terms:
            anc_a |= oracle_reachable_up(edges, t)
        anc_b: set[str] = set()
        for t in disease_terms:
            anc_b |= oracle_reachable_up(edges, t)
        inter = sum(ic[t] for t in anc_a & anc_b if t in ic)
        union = sum(ic[t] for t in anc_a | anc_b if t in ic)
        return inter / union if union > 0 else 0.0
    matrix = {
        (a, b): oracle_pair_sim(a, b, kg, ic)
        for a in gene_terms for b in disease_terms
    }
    if aggregation == "MAX":
        return max(matrix.values())
    row = [max(matrix[(a, b)] for b in disease_terms) for a in gene_terms]
    col = [max(matrix[(a, b)] for a in gene_terms) for b in disease_terms]
    return 0.5 * (sum(row) / len(row) + sum(col) / len(col))


def oracle_auc(y_true, scores) -> float:
    """Exhaustive concordant-pair counting."""
    positives = [s for s, y in zip(scores, y_true) if y == 1]
    negatives = [s for s, y in zip(scores, y_true) if y == 0]
    total = 0.0
    for p in positives:
        for q in negatives:
            if p > q:
                total += 1.0
            elif p == q:
                total += 0.5
    return total / (len(positives) * len(negatives))


def finite_difference(f, x: np.ndarray, step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of a scalar function of one array.

    The step sits near the float64 optimum for central differences
    (cube root of machine epsilon times the value scale).
    """
    grad = np.zeros_like(x, dtype=np.float64)
    it = np.nditer(x, flags=["multi_index"])
    for _ in it:
        idx = it.multi_index
        orig = x[idx]
        x[idx] = orig + step
        up = f()
        x[idx] = orig - step
        down = f()
        x[idx] = orig
        grad[idx] = (up - down) / (2.0 * step)
    return grad


def max_relative_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    analytic = np.asarray(analytic, dtype=np.float64).ravel()
    numeric = np.asarray(numeric, dtype=np.float64).ravel()
    denom = np.maximum(np.maximum(np.abs(analytic), np.abs(numeric)), 1e-6)
    return float(np.max(np.abs(analytic - numeric) / denom))
