"""Staged pipeline: ingest -> build-kg -> baseline -> embed -> pair ->
train -> evaluate -> report.

Every stage writes its artifacts plus a manifest listing the digests of
everything it read and produced; wall-clock timings go to a sidecar file
so deterministic reruns stay byte-identical. Seeds are explicit in the
configuration and per-cell seeds are derived from them by hashing the
cell name.
"""

from __future__ import annotations

import hashlib
import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .errors import (
    ConfigurationError,
    GdapredError,
    IntegrityError,
    StageDependencyError,
)
from .evaluation import (
    evaluate_run,
    read_dataset,
    sample_negatives,
    stratified_split,
    write_dataset,
    write_roc_tsv,
)
from .kg import KG_VARIANTS, build_kg, read_triples, write_triples
from .kge import (
    KGE_METHODS,
    KgeTrainConfig,
    embed,
    read_embeddings,
    write_embeddings,
)
from .learn import (
    CLASSIFIER_KINDS,
    DEFAULT_GRIDS,
    GridSpec,
    grid_search,
    load_model,
    make_classifier,
)
from .ontology import (
    AnnotationMap,
    EntityId,
    filter_associations,
    merge_annotation_maps,
    parse_associations,
    parse_disease_phenotype,
    parse_gaf,
    parse_gene_phenotype,
    parse_mapping,
    parse_obo,
    prune_annotations,
    restrict_annotations,
)
from .pairing import (
    PAIR_OPERATORS,
    build_pair_features,
    cosine_unit_score,
    read_pair_features,
    write_pair_features,
)
from .semsim import SSM_CONFIGS, ssm_baseline, write_scored_pairs

logger = logging.getLogger(__name__)

STAGES = ("ingest", "build-kg", "baseline", "embed", "pair", "train",
          "evaluate", "report")
COSINE = "cosine"
SEED_NAMES = ("sampling", "split", "embedding", "training")

REQUIRED_INPUTS = ("hp_obo", "gaf", "gene_accession_map", "gene_phenotype",
                   "disease_phenotype", "disease_map", "associations")


@dataclass
class PipelineConfig:
    inputs: dict[str, str]
    seeds: dict[str, int]
    output_dir: str
    excluded_sources: set[str] = field(default_factory=set)
    exclude_evidence: set[str] = field(default_factory=set)
    kg_variants: list[str] = field(default_factory=lambda: ["HP"])
    ssm_measures: list[str] = field(default_factory=lambda: [c.name for c in SSM_CONFIGS])
    embedding: dict = field(default_factory=dict)
    methods: list[str] = field(default_factory=lambda: ["walk"])
    operators: list[str] = field(default_factory=lambda: ["hadamard"])
    learners: list[str] = field(default_factory=lambda: ["random_forest", COSINE])
    grids: dict = field(default_factory=dict)
    classifier_params: dict = field(default_factory=dict)
    grid_folds: int = 5
    train_fraction: float = 0.7
    deterministic: bool = True
    raw: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        for name in REQUIRED_INPUTS:
            if name not in self.inputs:
                raise ConfigurationError(f"missing input path {name!r}")
        for name, path in self.inputs.items():
            if not Path(path).exists():
                raise ConfigurationError(f"input {name!r} does not exist: {path}")
        for name in SEED_NAMES:
            if name not in self.seeds:
                raise ConfigurationError(
                    f"seeds must be explicit; missing seeds.{name}")
        for variant in self.kg_variants:
            if variant not in KG_VARIANTS:
                raise ConfigurationError(f"unknown KG variant {variant!r}")
        if any(v != "HP" for v in self.kg_variants) and "go_obo" not in self.inputs:
            raise ConfigurationError("GO-based variants need inputs.go_obo")
        known_measures = {c.name for c in SSM_CONFIGS}
        for measure in self.ssm_measures:
            if measure not in known_measures:
                raise ConfigurationError(f"unknown SSM measure {measure!r}")
        for method in self.methods:
            if method not in KGE_METHODS:
                raise ConfigurationError(f"unknown embedding method {method!r}")
        for op in self.operators:
            if op not in PAIR_OPERATORS:
                raise ConfigurationError(f"unknown pair operator {op!r}")
        for learner in self.learners:
            if learner != COSINE and learner not in CLASSIFIER_KINDS:
                raise ConfigurationError(f"unknown learner {learner!r}")
        for section_name, section in (("grids", self.grids),
                                      ("classifier_params", self.classifier_params)):
            for kind, value in section.items():
                if kind not in CLASSIFIER_KINDS:
                    raise ConfigurationError(
                        f"{section_name} names unknown classifier {kind!r}")
                if section_name == "grids" and not (
                        value == "default" or isinstance(value, dict)):
                    raise ConfigurationError(
                        f"grids.{kind} must be a candidate mapping or 'default'")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigurationError(
                "train_fraction must lie strictly between 0 and 1")

    @classmethod
    def from_file(cls, path, out_override: str | None = None,
                  seed_override: int | None = None,
                  deterministic: bool | None = None) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
        if seed_override is not None:
            raw["seeds"] = {name: seed_override + i
                            for i, name in enumerate(SEED_NAMES)}
        if out_override is not None:
            raw["output_dir"] = out_override
        if deterministic is not None:
            raw["deterministic"] = deterministic
        if "output_dir" not in raw:
            raise ConfigurationError("config needs an output_dir")
        return cls(
            inputs=dict(raw.get("inputs", {})),
            seeds=dict(raw.get("seeds", {})),
            output_dir=raw["output_dir"],
            excluded_sources=set(raw.get("excluded_sources", [])),
            exclude_evidence=set(raw.get("exclude_evidence", [])),
            kg_variants=list(raw.get("kg_variants", ["HP"])),
            ssm_measures=list(raw.get("ssm_measures",
                                      [c.name for c in SSM_CONFIGS])),
            embedding=dict(raw.get("embedding", {})),
            methods=list(raw.get("methods", ["walk"])),
            operators=list(raw.get("operators", ["hadamard"])),
            learners=list(raw.get("learners", ["random_forest", COSINE])),
            grids=dict(raw.get("grids", {})),
            classifier_params=dict(raw.get("classifier_params", {})),
            grid_folds=int(raw.get("grid_folds", 5)),
            train_fraction=float(raw.get("train_fraction", 0.7)),
            deterministic=bool(raw.get("deterministic", True)),
            raw=raw,
        )

    def kge_config(self, seed: int) -> KgeTrainConfig:
        params = {k: v for k, v in self.embedding.items() if k != "methods"}
        return KgeTrainConfig(**params, seed=seed)

    def out(self) -> Path:
        return Path(self.output_dir)

    def echo(self) -> dict:
        return self.raw or {
            "inputs": self.inputs, "seeds": self.seeds,
            "output_dir": self.output_dir,
        }


def derive_seed(base: int, label: str) -> int:
    """Stable per-cell seed: base combined with a hash of the cell name."""
    digest = hashlib.sha256(f"{base}:{label}".encode()).hexdigest()
    return int(digest[:12], 16)


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(stage_dir: Path, stage: str, config: PipelineConfig,
                   inputs: list, outputs: list, details: dict) -> None:
    manifest = {
        "stage": stage,
        "tool_version": __version__,
        "config": config.echo(),
        "inputs": {str(p): file_digest(p) for p in sorted(inputs, key=str)},
        "outputs": {p.name: file_digest(p) for p in sorted(outputs, key=str)},
        "details": details,
    }
    with open(stage_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def write_timings(stage_dir: Path, stage: str, seconds: float) -> None:
    # separate file: wall-clock numbers must not break manifest determinism
    with open(stage_dir / "timings.json", "w", encoding="utf-8") as fh:
        json.dump({"stage": stage, "seconds": seconds}, fh)
        fh.write("\n")


def _stage_dir(config: PipelineConfig, stage: str) -> Path:
    path = config.out() / stage
    path.mkdir(parents=True, exist_ok=True)
    return path


def _need(path: Path, producer: str) -> Path:
    if not path.exists():
        raise StageDependencyError(
            f"missing artifact {path}; run the {producer} stage first")
    return path


def write_annotation_tsv(amap: AnnotationMap, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("entity\tterm\n")
        for entity in sorted(amap.entries, key=lambda e: e.id):
            for term in sorted(amap.entries[entity]):
                fh.write(f"{entity.id}\t{term}\n")


def read_annotation_tsv(path: Path, kind: str) -> AnnotationMap:
    amap = AnnotationMap()
    with open(path, encoding="utf-8") as fh:
        next(fh)
        for line in fh:
            entity_id, term = line.rstrip("\n").split("\t")
            amap.add(EntityId(entity_id, kind), term)
    return amap


def _read_text(path) -> str:
    return Path(path).read_text(encoding="utf-8")


def _parse_input(parser, path, *args, **kwargs):
    """Run a parser on a file, prefixing any error with the file path."""
    try:
        return parser(_read_text(path), *args, **kwargs)
    except GdapredError as err:
        raise type(err)(f"{path}: {err}") from err


# ---------------------------------------------------------------------------
# stages


def cmd_ingest(config: PipelineConfig) -> dict:
    """Parse inputs, filter association pairs, sample negatives, split."""
    t0 = time.perf_counter()
    stage_dir = _stage_dir(config, "ingest")
    dataset_path = stage_dir / "dataset.tsv"
    if dataset_path.exists():
        raise ConfigurationError(
            f"{dataset_path} already exists; remove it to resample "
            "(the persisted split is reused by every downstream stage)")

    hp = _parse_input(parse_obo, config.inputs["hp_obo"])
    go = None
    if "go_obo" in config.inputs:
        go = _parse_input(parse_obo, config.inputs["go_obo"])

    accession_map = parse_mapping(_read_text(config.inputs["gene_accession_map"]))
    disease_map = parse_mapping(_read_text(config.inputs["disease_map"]))
    gene_go = _parse_input(parse_gaf, config.inputs["gaf"], accession_map,
                           config.exclude_evidence or None)
    gene_hp = _parse_input(parse_gene_phenotype, config.inputs["gene_phenotype"])
    disease_hp = _parse_input(parse_disease_phenotype,
                              config.inputs["disease_phenotype"], disease_map)

    gene_hp = prune_annotations(gene_hp, [hp])
    disease_hp = prune_annotations(disease_hp, [hp])
    if go is not None:
        gene_go = prune_annotations(gene_go, [go])

    associations = _parse_input(parse_associations, config.inputs["associations"])
    kept = filter_associations(associations, config.excluded_sources,
                               gene_go, gene_hp, disease_hp)
    logger.info("ingest: %d/%d association pairs kept", len(kept), len(associations))

    dataset = sample_negatives(kept, seed=config.seeds["sampling"])
    dataset = stratified_split(dataset, config.train_fraction,
                               seed=config.seeds["split"])
    write_dataset(dataset, dataset_path)

    positives_path = stage_dir / "positives.tsv"
    with open(positives_path, "w", encoding="utf-8") as fh:
        fh.write("gene\tdisease\tsources\n")
        for assoc in kept:
            fh.write(f"{assoc.gene.id}\t{assoc.disease.id}\t"
                     f"{';'.join(sorted(assoc.sources))}\n")

    genes, diseases = dataset.entities()
    gene_hp = restrict_annotations(gene_hp, genes)
    disease_hp = restrict_annotations(disease_hp, diseases)
    gene_go = restrict_annotations(gene_go, genes)
    files = {
        "annotations_gene_hp.tsv": gene_hp,
        "annotations_disease_hp.tsv": disease_hp,
        "annotations_gene_go.tsv": gene_go,
    }
    for name, amap in files.items():
        write_annotation_tsv(amap, stage_dir / name)

    counts = {
        "genes": len({a.gene for a in kept}),
        "diseases": len({a.disease for a in kept}),
        "positive_pairs": len(kept),
        "dataset_pairs": len(dataset.pairs),
        "raw_association_pairs": len(associations),
    }
    outputs = [dataset_path, positives_path] + [stage_dir / n for n in files]
    write_manifest(stage_dir, "ingest", config,
                   [Path(p) for p in config.inputs.values()], outputs, counts)
    write_timings(stage_dir, "ingest", time.perf_counter() - t0)
    return counts


def _load_ingest(config: PipelineConfig):
    ingest_dir = config.out() / "ingest"
    dataset = read_dataset(_need(ingest_dir / "dataset.tsv", "ingest"))
    gene_hp = read_annotation_tsv(
        _need(ingest_dir / "annotations_gene_hp.tsv", "ingest"), "gene")
    disease_hp = read_annotation_tsv(
        _need(ingest_dir / "annotations_disease_hp.tsv", "ingest"), "disease")
    gene_go = read_annotation_tsv(
        _need(ingest_dir / "annotations_gene_go.tsv", "ingest"), "gene")
    return dataset, gene_hp, disease_hp, gene_go


def cmd_build_kg(config: PipelineConfig) -> dict:
    """Assemble every requested KG variant from ontologies + annotations."""
    t0 = time.perf_counter()
    stage_dir = _stage_dir(config, "kg")
    _, gene_hp, disease_hp, gene_go = _load_ingest(config)
    hp = parse_obo(_read_text(config.inputs["hp_obo"]))
    go = parse_obo(_read_text(config.inputs["go_obo"])) \
        if "go_obo" in config.inputs else None

    details = {}
    outputs = []
    for variant in config.kg_variants:
        if variant == "HP":
            kg = build_kg(variant, hp, gene_hp=gene_hp, disease_hp=disease_hp)
        else:
            kg = build_kg(variant, hp, go, gene_hp=gene_hp,
                          disease_hp=disease_hp, gene_go=gene_go)
        path = stage_dir / f"kg_{variant}.tsv"
        write_triples(kg, path)
        outputs.append(path)
        details[variant] = {"nodes": kg.node_count, "triples": kg.triple_count,
                            **kg.notes}
        logger.info("build-kg: %s has %d nodes, %d triples",
                    variant, kg.node_count, kg.triple_count)

    inputs = [Path(config.inputs["hp_obo"])]
    if go is not None:
        inputs.append(Path(config.inputs["go_obo"]))
    inputs += [config.out() / "ingest" / n for n in (
        "annotations_gene_hp.tsv", "annotations_disease_hp.tsv",
        "annotations_gene_go.tsv")]
    write_manifest(stage_dir, "build-kg", config, inputs, outputs, details)
    write_timings(stage_dir, "build-kg", time.perf_counter() - t0)
    return details


def cmd_baseline(config: PipelineConfig) -> dict:
    """Six-measure similarity baseline on the single-ontology KG."""
    t0 = time.perf_counter()
    stage_dir = _stage_dir(config, "baseline")
    dataset, gene_hp, disease_hp, _ = _load_ingest(config)
    hp_kg_path = config.out() / "kg" / "kg_HP.tsv"
    if not hp_kg_path.exists():
        raise StageDependencyError(
            f"missing artifact {hp_kg_path}; the baseline runs on the HP "
            'variant, so include "HP" in kg_variants and rerun build-kg')
    kg = read_triples(hp_kg_path, "HP")
    annotations = merge_annotation_maps(gene_hp, disease_hp)

    rows = {}
    outputs = []
    for ssm_config in SSM_CONFIGS:
        if ssm_config.name not in config.ssm_measures:
            continue
        scored = ssm_baseline(dataset, ssm_config, kg, annotations)
        if scored.excluded_entities:
            raise IntegrityError(
                "baseline cannot score the persisted dataset: entities "
                "without annotations: " + ", ".join(
                    e.node_id for e in scored.excluded_entities))
        scored_path = stage_dir / f"scored_{ssm_config.name}.tsv"
        write_scored_pairs(scored, scored_path)
        report = evaluate_run(
            dataset, "score_threshold", scores=scored.normalized_scores(),
            config={"measure": ssm_config.name}, seed=config.seeds["split"])
        report_path = stage_dir / f"eval_{ssm_config.name}.json"
        report.write(report_path)
        roc_path = stage_dir / f"roc_{ssm_config.name}.tsv"
        write_roc_tsv(report.roc, roc_path)
        outputs += [scored_path, report_path, roc_path]
        rows[ssm_config.name] = {"waf": report.waf, "auc": report.auc,
                                 "threshold": report.threshold}
        logger.info("baseline %s: WAF=%.4f AUC=%.4f", ssm_config.name,
                    report.waf, report.auc)

    best = max(rows, key=lambda name: (rows[name]["waf"], name)) if rows else None
    summary = {"measures": rows, "best": best}
    summary_path = stage_dir / "baseline.json"
    with open(summary_path, "w", encoding="utf-8") as fh:
        json.dump(summary, fh, indent=2, sort_keys=True)
        fh.write("\n")
    # one column per measure, the best WAF starred
    ordered = [c.name for c in SSM_CONFIGS if c.name in rows]
    table_path = stage_dir / "baseline.tsv"
    with open(table_path, "w", encoding="utf-8") as fh:
        fh.write("metric\t" + "\t".join(ordered) + "\n")
        fh.write("waf\t" + "\t".join(
            repr(rows[n]["waf"]) + ("*" if n == best else "")
            for n in ordered) + "\n")
        fh.write("auc\t" + "\t".join(repr(rows[n]["auc"]) for n in ordered) + "\n")
        fh.write("threshold\t" + "\t".join(
            repr(rows[n]["threshold"]) for n in ordered) + "\n")
    outputs += [summary_path, table_path]

    inputs = [config.out() / "ingest" / "dataset.tsv",
              config.out() / "kg" / "kg_HP.tsv"]
    write_manifest(stage_dir, "baseline", config, inputs, outputs, summary)
    write_timings(stage_dir, "baseline", time.perf_counter() - t0)
    return summary


def cmd_embed(config: PipelineConfig) -> dict:
    """Train an embedding table per (variant, method) grid cell."""
    t0 = time.perf_counter()
    stage_dir = _stage_dir(config, "embed")
    details = {}
    outputs = []
    inputs = []
    ontologies = None
    for variant in config.kg_variants:
        kg_path = _need(config.out() / "kg" / f"kg_{variant}.tsv", "build-kg")
        inputs.append(kg_path)
        kg = read_triples(kg_path, variant)
        for method in config.methods:
            seed = derive_seed(config.seeds["embedding"], f"{variant}/{method}")
            kge_config = config.kge_config(seed)
            if method == "walk_lexical" and ontologies is None:
                ontologies = [parse_obo(_read_text(config.inputs["hp_obo"]))]
                if "go_obo" in config.inputs:
                    ontologies.append(parse_obo(_read_text(config.inputs["go_obo"])))
            table = embed(kg, method, kge_config, ontologies or ())
            path = stage_dir / f"embeddings_{variant}_{method}.txt"
            write_embeddings(table, path)
            outputs.append(path)
            details[f"{variant}/{method}"] = {
                "seed": seed, "dimension": table.dimension,
                "nodes": len(table.vectors),
            }
            logger.info("embed %s/%s: %d vectors (dim %d)", variant, method,
                        len(table.vectors), table.dimension)
    write_manifest(stage_dir, "embed", config, inputs, outputs, details)
    write_timings(stage_dir, "embed", time.perf_counter() - t0)
    return details


def cmd_pair(config: PipelineConfig) -> dict:
    """Combine gene/disease vectors for every (variant, method, operator)."""
    t0 = time.perf_counter()
    stage_dir = _stage_dir(config, "pair")
    dataset, _, _, _ = _load_ingest(config)
    details = {}
    outputs = []
    inputs = [config.out() / "ingest" / "dataset.tsv"]
    for variant in config.kg_variants:
        for method in config.methods:
            emb_path = _need(
                config.out() / "embed" / f"embeddings_{variant}_{method}.txt",
                "embed")
            inputs.append(emb_path)
            table = read_embeddings(emb_path, method=method)
            for operator in config.operators:
                features = build_pair_features(dataset, table, operator)
                path = stage_dir / f"features_{variant}_{method}_{operator}.tsv"
                write_pair_features(features, path)
                outputs.append(path)
                details[f"{variant}/{method}/{operator}"] = {
                    "rows": int(features.rows.shape[0]),
                    "columns": int(features.rows.shape[1]),
                }
    write_manifest(stage_dir, "pair", config, inputs, outputs, details)
    write_timings(stage_dir, "pair", time.perf_counter() - t0)
    return details


def cmd_train(config: PipelineConfig) -> dict:
    """Fit every requested classifier on the training partition only."""
    t0 = time.perf_counter()
    stage_dir = _stage_dir(config, "train")
    dataset, _, _, _ = _load_ingest(config)
    train_idx = dataset.partition_indices("train")
    labels = dataset.labels()
    details = {}
    outputs = []
    inputs = [config.out() / "ingest" / "dataset.tsv"]
    for variant in config.kg_variants:
        for method in config.methods:
            for operator in config.operators:
                feat_path = _need(
                    config.out() / "pair"
                    / f"features_{variant}_{method}_{operator}.tsv", "pair")
                inputs.append(feat_path)
                features = read_pair_features(feat_path, operator, method)
                X_train = features.rows[train_idx]
                y_train = labels[train_idx]
                for kind in config.learners:
                    if kind == COSINE:
                        continue
                    cell = f"{variant}_{method}_{operator}_{kind}"
                    seed = derive_seed(config.seeds["training"], cell)
                    grid = config.grids.get(kind)
                    if grid == "default":
                        grid = DEFAULT_GRIDS[kind]
                    if grid:
                        spec = GridSpec(dict(grid), fold_count=config.grid_folds)
                        best_params, model = grid_search(
                            kind, X_train, y_train, spec, seed)
                    else:
                        params = config.classifier_params.get(kind, {})
                        model = make_classifier(kind, params, seed).fit(
                            X_train, y_train)
                        best_params = dict(params)
                    path = stage_dir / f"model_{cell}.json"
                    model.save(path)
                    outputs.append(path)
                    details[cell] = {"seed": seed, "best_params":
                                     {k: _json_safe(v) for k, v in best_params.items()}}
                    logger.info("train %s done", cell)
    write_manifest(stage_dir, "train", config, inputs, outputs, details)
    write_timings(stage_dir, "train", time.perf_counter() - t0)
    return details


def _json_safe(value):
    if isinstance(value, tuple):
        return list(value)
    return value


def cmd_evaluate(config: PipelineConfig) -> dict:
    """Score every grid cell; cosine cells reuse the baseline protocol."""
    t0 = time.perf_counter()
    stage_dir = _stage_dir(config, "evaluate")
    dataset, _, _, _ = _load_ingest(config)
    details = {}
    summary_rows = []
    outputs = []
    inputs = [config.out() / "ingest" / "dataset.tsv"]
    for variant in config.kg_variants:
        for method in config.methods:
            cosine_scores = None
            for operator in config.operators:
                feat_path = _need(
                    config.out() / "pair"
                    / f"features_{variant}_{method}_{operator}.tsv", "pair")
                features = read_pair_features(feat_path, operator, method)
                for learner in config.learners:
                    cell = f"{variant}_{method}_{operator}_{learner}"
                    cell_config = {"variant": variant, "method": method,
                                   "operator": operator, "learner": learner}
                    if learner == COSINE:
                        if cosine_scores is None:
                            emb_path = _need(
                                config.out() / "embed"
                                / f"embeddings_{variant}_{method}.txt", "embed")
                            table = read_embeddings(emb_path, method=method)
                            cosine_scores = np.array([
                                cosine_unit_score(table.vectors[p.gene.node_id],
                                                  table.vectors[p.disease.node_id])
                                for p in dataset.pairs])
                        report = evaluate_run(
                            dataset, "score_threshold", scores=cosine_scores,
                            config=cell_config, seed=config.seeds["split"])
                    else:
                        model_path = _need(
                            config.out() / "train" / f"model_{cell}.json", "train")
                        inputs.append(model_path)
                        model = load_model(model_path)
                        report = evaluate_run(
                            dataset, "classifier", model=model, features=features,
                            config=cell_config,
                            seed=derive_seed(config.seeds["training"], cell))
                    report_path = stage_dir / f"eval_{cell}.json"
                    report.write(report_path)
                    roc_path = stage_dir / f"roc_{cell}.tsv"
                    write_roc_tsv(report.roc, roc_path)
                    outputs += [report_path, roc_path]
                    details[cell] = {"waf": report.waf, "auc": report.auc,
                                     "threshold": report.threshold}
                    summary_rows.append(
                        (variant, method, operator, learner, details[cell]))
                    logger.info("evaluate %s: WAF=%.4f AUC=%.4f", cell,
                                report.waf, report.auc)
    summary_path = stage_dir / "summary.tsv"
    summary_rows.sort(key=lambda r: r[:4])
    with open(summary_path, "w", encoding="utf-8") as fh:
        fh.write("variant\tmethod\toperator\tlearner\twaf\tauc\tthreshold\n")
        for variant, method, operator, learner, row in summary_rows:
            fh.write(f"{variant}\t{method}\t{operator}\t{learner}\t"
                     f"{row['waf']!r}\t{row['auc']!r}\t{row['threshold']!r}\n")
    outputs.append(summary_path)
    write_manifest(stage_dir, "evaluate", config, inputs, outputs, details)
    write_timings(stage_dir, "evaluate", time.perf_counter() - t0)
    return details


def cmd_report(config: PipelineConfig) -> dict:
    """Rank all results by WAF, with improvement over the best baseline."""
    t0 = time.perf_counter()
    stage_dir = _stage_dir(config, "report")
    baseline_path = config.out() / "baseline" / "baseline.json"
    baseline = None
    inputs = []
    if baseline_path.exists():
        with open(baseline_path, encoding="utf-8") as fh:
            baseline = json.load(fh)
        inputs.append(baseline_path)

    grid_rows = {}
    eval_dir = config.out() / "evaluate"
    manifest_path = eval_dir / "manifest.json"
    if manifest_path.exists():
        with open(manifest_path, encoding="utf-8") as fh:
            grid_rows = json.load(fh)["details"]
        inputs.append(manifest_path)
    if baseline is None and not grid_rows:
        raise StageDependencyError(
            "nothing to report: run the baseline and/or evaluate stages first")

    best_baseline_waf = None
    rows = []
    if baseline is not None:
        for name, row in baseline["measures"].items():
            rows.append({"name": f"baseline/{name}", "waf": row["waf"],
                         "auc": row["auc"]})
        if baseline["measures"]:
            best_baseline_waf = max(r["waf"] for r in baseline["measures"].values())
    for cell, row in grid_rows.items():
        rows.append({"name": f"grid/{cell}", "waf": row["waf"], "auc": row["auc"]})
    for row in rows:
        if best_baseline_waf:
            row["improvement_over_best_baseline"] = (
                (row["waf"] - best_baseline_waf) / best_baseline_waf)
        else:
            row["improvement_over_best_baseline"] = None
    rows.sort(key=lambda r: (-r["waf"], r["name"]))

    report = {"best_baseline_waf": best_baseline_waf, "ranking": rows}
    json_path = stage_dir / "report.json"
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    text_path = stage_dir / "report.md"
    with open(text_path, "w", encoding="utf-8") as fh:
        fh.write("| rank | name | WAF | AUC | vs best baseline |\n")
        fh.write("|---|---|---|---|---|\n")
        for i, row in enumerate(rows, start=1):
            delta = row["improvement_over_best_baseline"]
            delta_str = f"{delta:+.1%}" if delta is not None else "n/a"
            fh.write(f"| {i} | {row['name']} | {row['waf']:.4f} | "
                     f"{row['auc']:.4f} | {delta_str} |\n")
    write_manifest(stage_dir, "report", config, inputs, [json_path, text_path],
                   {"rows": len(rows)})
    write_timings(stage_dir, "report", time.perf_counter() - t0)
    return report


STAGE_FUNCTIONS = {
    "ingest": cmd_ingest,
    "build-kg": cmd_build_kg,
    "baseline": cmd_baseline,
    "embed": cmd_embed,
    "pair": cmd_pair,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "report": cmd_report,
}
