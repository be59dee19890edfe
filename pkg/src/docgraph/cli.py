"""Command-line interface: per-stage subcommands plus an end-to-end pipeline.

The pipeline runs corpus ingestion, entity loading, word-vector training,
entity matching, graph construction, feature building, propagation, joint
clustering, and (when labels exist) evaluation. Every stage writes its
artifact into the workdir together with a content-hash cache entry, so
reruns skip stages whose inputs and parameters are unchanged.

Configuration is a TOML file over defaults, with --set a.b=value overrides.
Exit codes: 0 success, 2 configuration error, 3 data error, 4 numerical
failure.
"""

from __future__ import annotations

import argparse
import copy
import hashlib
import json
import logging
import sys
from pathlib import Path

import numpy as np

try:
    import tomllib as tomli  # Python >= 3.11
except ModuleNotFoundError:  # pragma: no cover
    import tomli

from . import cluster, corpus as corpus_mod, entity_graph, features as features_mod
from . import metrics, model_selection, propagation, synth, word2vec
from .errors import (
    EXIT_CONFIG,
    EXIT_DATA,
    EXIT_NUMERICAL,
    EXIT_OK,
    ConfigError,
    DataError,
    DocgraphError,
    NumericalError,
)

logger = logging.getLogger(__name__)

DEFAULTS: dict = {
    "seed": 0,
    "workdir": "work",
    "threads": 1,
    "paths": {"corpus": "", "entities": "", "embeddings": ""},
    "stopwords": {"source": "builtin:en"},
    "graph": {
        "kind": "ner",
        "sim_threshold": 0.9,
        "min_shared_links": 3,
        "same_type_only": True,
        "k_nn": 10,
    },
    "features": {"kind": "bow", "max_features": 2000, "tfidf": False},
    "word_vectors": {
        "dim": 500,
        "window": 5,
        "min_count": 10,
        "epochs": 20,
        "negative_samples": 5,
        "initial_lr": 0.025,
        "final_lr": 1e-4,
    },
    "embed_api": {
        "base_url": "",
        "model_name": "",
        "api_key_env": "OPENAI_API_KEY",
        "max_tokens_per_doc": 8191,
        "batch_size": 64,
    },
    "cluster": {
        "k": 0,
        "power": 2,
        "max_iter": 30,
        "tol": 1e-6,
        "n_init": 10,
        "kmeans_max_iter": 300,
        "kmeans_n_init": 10,
        "cluster_weight": 1.0,
        "normalize_rows": False,
    },
    "selection": {"m": 0, "k_min": 2, "k_max": 20, "p_min": 1, "p_max": 50},
    "synth": {
        "n_docs": 600,
        "k_true": 5,
        "entity_pool_size": 40,
        "entities_per_doc": 8,
        "cross_topic_entity_leak": 0.05,
        "feature_dim": 16,
        "feature_noise": 1.0,
    },
}


# ---------------------------------------------------------------- config


def _merge(base: dict, override: dict, prefix: str = "") -> None:
    for key, value in override.items():
        dotted = f"{prefix}{key}"
        if key not in base:
            raise ConfigError(f"unknown config key: {dotted}")
        current = base[key]
        if isinstance(current, dict):
            if not isinstance(value, dict):
                raise ConfigError(f"config key {dotted} must be a table")
            _merge(current, value, dotted + ".")
        else:
            base[key] = _coerce(dotted, current, value)


def _coerce(dotted: str, default, value):
    if isinstance(default, bool):
        if isinstance(value, bool):
            return value
        if isinstance(value, str) and value.lower() in ("true", "false", "1", "0"):
            return value.lower() in ("true", "1")
        raise ConfigError(f"config key {dotted} expects a boolean, got {value!r}")
    if isinstance(default, int):
        if isinstance(value, bool):
            raise ConfigError(f"config key {dotted} expects an integer, got {value!r}")
        if isinstance(value, int):
            return value
        if isinstance(value, str):
            try:
                return int(value)
            except ValueError:
                pass
        raise ConfigError(f"config key {dotted} expects an integer, got {value!r}")
    if isinstance(default, float):
        if isinstance(value, (int, float)) and not isinstance(value, bool):
            return float(value)
        if isinstance(value, str):
            try:
                return float(value)
            except ValueError:
                pass
        raise ConfigError(f"config key {dotted} expects a number, got {value!r}")
    if isinstance(value, str):
        return value
    raise ConfigError(f"config key {dotted} expects a string, got {value!r}")


def load_config(path: str | None = None, sets=(), workdir: str | None = None,
                seed: int | None = None, threads: int | None = None) -> dict:
    """Defaults, overlaid with a TOML file, then --set key=value pairs."""
    cfg = copy.deepcopy(DEFAULTS)
    if path:
        file_path = Path(path)
        if not file_path.exists():
            raise ConfigError(f"config file not found: {file_path}")
        try:
            parsed = tomli.loads(file_path.read_text(encoding="utf-8"))
        except tomli.TOMLDecodeError as e:
            raise ConfigError(f"malformed config file {file_path}: {e}") from e
        _merge(cfg, parsed)
    for item in sets:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        dotted, raw = item.split("=", 1)
        node = cfg
        parts = dotted.strip().split(".")
        for part in parts[:-1]:
            if part not in node or not isinstance(node[part], dict):
                raise ConfigError(f"unknown config key: {dotted}")
            node = node[part]
        leaf = parts[-1]
        if leaf not in node or isinstance(node[leaf], dict):
            raise ConfigError(f"unknown config key: {dotted}")
        node[leaf] = _coerce(dotted, node[leaf], raw)
    if workdir is not None:
        cfg["workdir"] = workdir
    if seed is not None:
        cfg["seed"] = seed
    if threads is not None:
        cfg["threads"] = threads
    if cfg["graph"]["kind"] not in ("ner", "knn"):
        raise ConfigError(f"graph.kind must be 'ner' or 'knn', got {cfg['graph']['kind']!r}")
    if cfg["features"]["kind"] not in ("bow", "llm"):
        raise ConfigError(
            f"features.kind must be 'bow' or 'llm', got {cfg['features']['kind']!r}")
    if cfg["threads"] < 1:
        raise ConfigError(f"threads must be >= 1, got {cfg['threads']}")
    return cfg


def _graph_config(cfg) -> entity_graph.GraphConfig:
    g = cfg["graph"]
    return entity_graph.GraphConfig(
        sim_threshold=g["sim_threshold"],
        min_shared_links=g["min_shared_links"],
        same_type_only=g["same_type_only"],
    )


def _w2v_config(cfg) -> word2vec.W2vConfig:
    w = cfg["word_vectors"]
    return word2vec.W2vConfig(
        dim=w["dim"],
        window=w["window"],
        min_count=w["min_count"],
        epochs=w["epochs"],
        negative_samples=w["negative_samples"],
        initial_lr=w["initial_lr"],
        final_lr=w["final_lr"],
        seed=cfg["seed"],
        workers=cfg["threads"],
    )


def _cluster_config(cfg, k: int | None = None) -> cluster.ClusterConfig:
    c = cfg["cluster"]
    n_clusters = c["k"] if k is None else k
    if n_clusters < 2:
        raise ConfigError("cluster.k must be set to at least 2")
    return cluster.ClusterConfig(
        n_clusters=n_clusters,
        cluster_weight=c["cluster_weight"],
        max_iter=c["max_iter"],
        tol=c["tol"],
        seed=cfg["seed"],
        n_init=c["n_init"],
        kmeans_max_iter=c["kmeans_max_iter"],
        kmeans_n_init=c["kmeans_n_init"],
        normalize_rows=c["normalize_rows"],
        workers=cfg["threads"],
    )


def _synth_config(cfg) -> synth.SynthConfig:
    s = cfg["synth"]
    return synth.SynthConfig(seed=cfg["seed"], **s)


# ---------------------------------------------------------------- artifacts


class Workspace:
    def __init__(self, cfg: dict):
        self.dir = Path(cfg["workdir"])
        self.dir.mkdir(parents=True, exist_ok=True)

    def path(self, name: str) -> Path:
        return self.dir / name


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _dump_json(payload, path: Path) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


class StageRunner:
    """Content-hash cache over pipeline stages.

    A stage is skipped when its signature (name + parameters + input file
    hashes) matches the cache and every recorded output still exists with
    its recorded hash.
    """

    def __init__(self, ws: Workspace):
        self.ws = ws
        self.cache_path = ws.path("cache.json")
        self.cache = {}
        if self.cache_path.exists():
            try:
                self.cache = json.loads(self.cache_path.read_text(encoding="utf-8"))
            except json.JSONDecodeError:
                logger.warning("ignoring unreadable stage cache %s", self.cache_path)

    def _signature(self, name: str, params: dict, inputs) -> str:
        h = hashlib.sha256()
        h.update(name.encode())
        h.update(json.dumps(params, sort_keys=True, default=str).encode())
        for p in inputs:
            p = Path(p)
            h.update(str(p).encode())
            h.update(_sha256_file(p).encode() if p.exists() else b"<missing>")
        return h.hexdigest()

    def run(self, name: str, params: dict, inputs, outputs, fn) -> bool:
        """Execute fn guarded by the cache; returns True when skipped."""
        sig = self._signature(name, params, inputs)
        entry = self.cache.get(name)
        if entry and entry.get("signature") == sig:
            recorded = entry.get("outputs", {})
            if set(recorded) == {str(o) for o in outputs} and all(
                Path(o).exists() and _sha256_file(Path(o)) == digest
                for o, digest in recorded.items()
            ):
                print(f"[{name}] cached")
                return True
        try:
            fn()
        except DocgraphError as e:
            raise type(e)(f"stage {name} failed: {e}") from e
        for o in outputs:
            if not Path(o).exists():
                raise DataError(f"stage {name} did not produce {o}")
        self.cache[name] = {
            "signature": sig,
            "outputs": {str(o): _sha256_file(Path(o)) for o in outputs},
        }
        _dump_json(self.cache, self.cache_path)
        print(f"[{name}] done")
        return False


# ---------------------------------------------------------------- loading


def _require_corpus_path(cfg) -> Path:
    raw = cfg["paths"]["corpus"]
    if not raw:
        raise ConfigError("paths.corpus must be set")
    return Path(raw)


def _load_prepared_corpus(cfg, need_entities: bool = False) -> corpus_mod.Corpus:
    """Load corpus + annotations and tokenize with entity merging."""
    corp = corpus_mod.load_corpus(_require_corpus_path(cfg))
    ents = cfg["paths"]["entities"]
    if ents and Path(ents).exists():
        corpus_mod.load_entities(ents, corp)
    elif need_entities:
        raise DataError(f"entities file not found: {ents or '(paths.entities unset)'}")
    elif ents:
        logger.warning("entities file not found: %s; continuing without annotations",
                       ents)
    source = cfg["stopwords"]["source"]
    stopwords = corpus_mod.load_stopwords(source) if source else frozenset()
    corpus_mod.tokenize_corpus(corp, stopwords)
    return corp


def _read_matches(path: Path) -> list[entity_graph.EntityMatch]:
    if not path.exists():
        raise DataError(f"matches file not found: {path}")
    out = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                out.append(entity_graph.EntityMatch(
                    doc_i=rec["i"], doc_j=rec["j"], entity_i=rec["entity_i"],
                    entity_j=rec["entity_j"], similarity=rec["similarity"]))
            except (json.JSONDecodeError, KeyError, TypeError) as e:
                raise DataError(f"malformed match record at line {lineno}: {e}") from e
    return out


def _write_matches(matches, path: Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for m in matches:
            f.write(json.dumps({
                "i": m.doc_i, "j": m.doc_j, "entity_i": m.entity_i,
                "entity_j": m.entity_j, "similarity": m.similarity,
            }, sort_keys=True) + "\n")


# ---------------------------------------------------------------- stage bodies


def _stage_ingest(cfg, ws: Workspace) -> None:
    corp = _load_prepared_corpus(cfg)
    flagged = sum(d.flagged for d in corp)
    stats = {
        "documents": corp.n,
        "flagged_empty": flagged,
        "labels_present": corp.labels is not None,
        "k_true": corp.k_true,
    }
    _dump_json(stats, ws.path("stats.json"))


def _stage_entities(cfg, ws: Workspace, require: bool) -> None:
    corp = corpus_mod.load_corpus(_require_corpus_path(cfg))
    ents = cfg["paths"]["entities"]
    if ents and Path(ents).exists():
        annotations = corpus_mod.load_entities(ents, corp)
    elif require:
        raise DataError(f"entities file not found: {ents or '(paths.entities unset)'}")
    else:
        if ents:
            logger.warning("entities file not found: %s; writing empty annotations",
                           ents)
        annotations = {d.id: corpus_mod.EntityAnnotation(doc_id=d.id, entities={})
                       for d in corp}
    corpus_mod.save_entities(annotations, ws.path("entities_norm.json"))


def _stage_train_w2v(cfg, ws: Workspace) -> None:
    corp = _load_prepared_corpus(cfg)
    wv = word2vec.train_cbow(corp, _w2v_config(cfg))
    word2vec.save_vectors(wv, ws.path("vectors.bin"))
    print(f"trained {len(wv.vocab)} vectors of dimension {wv.dim}; "
          f"final epoch loss {wv.loss_per_epoch[-1]:.4f}")


def _stage_match(cfg, ws: Workspace) -> None:
    corp = _load_prepared_corpus(cfg, need_entities=True)
    wv = word2vec.load_vectors(ws.path("vectors.bin"))
    tokens = entity_graph.corpus_entity_tokens(corp)
    coverage = entity_graph.entity_coverage(tokens, wv)
    matches = entity_graph.find_matches(tokens, wv, _graph_config(cfg))
    _write_matches(matches, ws.path("matches.jsonl"))
    print(f"{len(matches)} entity matches; vocabulary coverage "
          f"{coverage['in_vocabulary']}/{coverage['total']} tokens")


def _stage_graph(cfg, ws: Workspace) -> None:
    ents = cfg["paths"]["entities"]
    if not ents or not Path(ents).exists():
        raise DataError(
            f"entity graph requires annotations: entities file not found: "
            f"{ents or '(paths.entities unset)'}")
    corp = corpus_mod.load_corpus(_require_corpus_path(cfg))
    matches = _read_matches(ws.path("matches.jsonl"))
    graph = entity_graph.build_ner_graph(matches, _graph_config(cfg), corp.n)
    entity_graph.save_graph(graph, ws.path("graph.txt"))
    stats = entity_graph.graph_stats(graph)
    print(f"entity graph: {stats.edges} edges, {stats.isolates} isolates, "
          f"{stats.components} components")


def _stage_knn_graph(cfg, ws: Workspace) -> None:
    fm = features_mod.load_features(ws.path("features_base.bin"))
    graph = entity_graph.build_knn_graph(fm, k_nn=cfg["graph"]["k_nn"])
    entity_graph.save_graph(graph, ws.path("graph.txt"))
    stats = entity_graph.graph_stats(graph)
    print(f"knn graph: {stats.edges} edges, {stats.components} components")


def _stage_features(cfg, ws: Workspace) -> None:
    kind = cfg["features"]["kind"]
    if kind == "bow":
        corp = _load_prepared_corpus(cfg)
        fm = features_mod.build_bow(corp, max_features=cfg["features"]["max_features"],
                                    tfidf=cfg["features"]["tfidf"])
    else:
        emb_path = cfg["paths"]["embeddings"]
        if not emb_path:
            raise ConfigError("features.kind='llm' needs paths.embeddings")
        corp = corpus_mod.load_corpus(_require_corpus_path(cfg))
        fm = features_mod.load_embeddings(emb_path, corp)
    features_mod.save_features(fm, ws.path("features_base.bin"))
    print(f"features: {fm.n} x {fm.d} ({fm.kind})")


def _stage_fetch_embeddings(cfg, ws: Workspace) -> None:
    corp = corpus_mod.load_corpus(_require_corpus_path(cfg))
    api = cfg["embed_api"]
    if not api["base_url"] or not api["model_name"]:
        raise ConfigError("embed_api.base_url and embed_api.model_name must be set")
    client = features_mod.EmbedClientConfig(
        base_url=api["base_url"],
        model_name=api["model_name"],
        api_key_env=api["api_key_env"],
        max_tokens_per_doc=api["max_tokens_per_doc"],
        batch_size=api["batch_size"],
        cache_path=ws.path("embeddings_cache.jsonl"),
    )
    fm, excluded = features_mod.fetch_embeddings(corp, client)
    features_mod.save_features(fm, ws.path("features_base.bin"))
    print(f"fetched embeddings for {fm.n} documents; {len(excluded)} excluded "
          f"(see {client.cache_path}.exclusions.json)")


def _stage_propagate(cfg, ws: Workspace) -> None:
    graph = entity_graph.load_graph(ws.path("graph.txt"))
    fm = features_mod.load_features(ws.path("features_base.bin"))
    power = cfg["cluster"]["power"]
    if power < 0:
        raise ConfigError(f"cluster.power must be >= 0, got {power}")
    smoothed = propagation.propagate(graph, fm, power)
    features_mod.save_features(smoothed, ws.path("propagated.bin"))
    print(f"propagated features at power {power}")


def _stage_fit(cfg, ws: Workspace) -> None:
    fm = features_mod.load_features(ws.path("propagated.bin"))
    result = cluster.fit(fm.values, _cluster_config(cfg))
    payload = {
        "loss_trace": result.loss_trace,
        "assignments": [int(a) for a in result.assignments],
        "k": result.k,
        "p": cfg["cluster"]["power"],
        "seed": cfg["seed"],
    }
    _dump_json(payload, ws.path("result.json"))
    emb = cluster.embed(fm.values, result.projection)
    features_mod.save_features(
        features_mod.FeatureMatrix(ids=fm.ids, values=emb, kind="embedding"),
        ws.path("embedding.bin"))
    sizes = np.bincount(result.assignments, minlength=result.k)
    print(f"fit k={result.k}: final loss {result.final_loss:.6g}, "
          f"cluster sizes {sizes.tolist()}")


def _stage_evaluate(cfg, ws: Workspace, pred_path: Path | None = None,
                    truth_path: str | None = None) -> None:
    pred_file = pred_path or ws.path("result.json")
    if not pred_file.exists():
        raise DataError(f"predictions file not found: {pred_file}")
    payload = json.loads(pred_file.read_text(encoding="utf-8"))
    if "assignments" not in payload:
        raise DataError(f"predictions file {pred_file} lacks 'assignments'")
    pred = payload["assignments"]
    if truth_path:
        truth_raw = json.loads(Path(truth_path).read_text(encoding="utf-8"))
        truth = truth_raw["labels"] if isinstance(truth_raw, dict) else truth_raw
    else:
        corp = corpus_mod.load_corpus(_require_corpus_path(cfg))
        truth = corp.labels
        if truth is None:
            raise DataError("corpus has no ground-truth labels to evaluate against")
    scores = metrics.evaluate(pred, truth)
    _dump_json(scores, ws.path("metrics.json"))
    print(metrics.format_table(scores, percent=True))


def _stage_synth(cfg, ws: Workspace) -> None:
    corp, annotations, fm = synth.generate(_synth_config(cfg))
    corpus_mod.save_corpus(corp, ws.path("corpus.jsonl"))
    corpus_mod.save_entities(annotations, ws.path("entities.json"))
    with open(ws.path("embeddings.jsonl"), "w", encoding="utf-8") as f:
        for doc_id, row in zip(fm.ids, fm.values):
            f.write(json.dumps({"id": doc_id, "embedding": [float(v) for v in row]})
                    + "\n")
    print(f"synthesized {corp.n} documents over {cfg['synth']['k_true']} topics "
          f"into {ws.dir}")


def _stage_select_k(cfg, ws: Workspace) -> None:
    fm = features_mod.load_features(ws.path("propagated.bin"))
    sel = cfg["selection"]
    m = sel["m"] or model_selection.default_oversegmentation(fm.n)
    base = _cluster_config(cfg, k=max(2, m))
    centroids, dropped = model_selection.oversegment(fm.values, m, base)
    dend = model_selection.ward_linkage(centroids)
    ranked = model_selection.suggest_k(dend, sel["k_min"], sel["k_max"])
    model_selection.save_dendrogram(dend, ws.path("dendrogram.json"))
    _dump_json({
        "oversegmentation": m,
        "dropped_centroids": dropped,
        "ranked": [[k, score] for k, score in ranked],
    }, ws.path("k_suggestions.json"))
    top = ", ".join(f"k={k} (gap {score:.4g})" for k, score in ranked[:3])
    print(f"suggested cluster counts: {top}")


def _stage_select_p(cfg, ws: Workspace) -> None:
    graph = entity_graph.load_graph(ws.path("graph.txt"))
    fm = features_mod.load_features(ws.path("features_base.bin"))
    sel = cfg["selection"]
    prop = propagation.build_propagator(graph)
    result = model_selection.sweep_p(
        prop, fm, k=_cluster_config(cfg).n_clusters,
        p_range=range(sel["p_min"], sel["p_max"] + 1),
        config=_cluster_config(cfg))
    model_selection.save_psweep(result, ws.path("psweep.csv"))
    _dump_json({"chosen_p": result.chosen_p,
                "sqrt_losses": {str(p): result.sqrt_losses[p]
                                for p in result.p_values}},
               ws.path("chosen_p.json"))
    print(f"chosen propagation power: p={result.chosen_p}")


# ---------------------------------------------------------------- pipeline


def _corpus_inputs(cfg) -> list[Path]:
    paths = [Path(cfg["paths"]["corpus"])]
    if cfg["paths"]["entities"]:
        paths.append(Path(cfg["paths"]["entities"]))
    return paths


def cmd_pipeline(cfg) -> int:
    ws = Workspace(cfg)
    runner = StageRunner(ws)
    kind = cfg["graph"]["kind"]
    base_inputs = _corpus_inputs(cfg)
    shared = {"seed": cfg["seed"], "stopwords": cfg["stopwords"]}

    runner.run("ingest", shared, base_inputs, [ws.path("stats.json")],
               lambda: _stage_ingest(cfg, ws))
    runner.run("entities", shared, base_inputs, [ws.path("entities_norm.json")],
               lambda: _stage_entities(cfg, ws, require=False))

    if kind == "ner":
        runner.run("train-w2v", {**shared, "word_vectors": cfg["word_vectors"]},
                   base_inputs + [ws.path("entities_norm.json")],
                   [ws.path("vectors.bin")], lambda: _stage_train_w2v(cfg, ws))
        runner.run("match", {**shared, "graph": cfg["graph"]},
                   base_inputs + [ws.path("entities_norm.json"),
                                  ws.path("vectors.bin")],
                   [ws.path("matches.jsonl")], lambda: _stage_match(cfg, ws))
        runner.run("graph", {**shared, "graph": cfg["graph"]},
                   base_inputs + [ws.path("matches.jsonl")],
                   [ws.path("graph.txt")], lambda: _stage_graph(cfg, ws))
        runner.run("features", {**shared, "features": cfg["features"],
                                "embeddings": cfg["paths"]["embeddings"]},
                   base_inputs, [ws.path("features_base.bin")],
                   lambda: _stage_features(cfg, ws))
    else:
        runner.run("features", {**shared, "features": cfg["features"],
                                "embeddings": cfg["paths"]["embeddings"]},
                   base_inputs, [ws.path("features_base.bin")],
                   lambda: _stage_features(cfg, ws))
        runner.run("knn-graph", {**shared, "k_nn": cfg["graph"]["k_nn"]},
                   [ws.path("features_base.bin")], [ws.path("graph.txt")],
                   lambda: _stage_knn_graph(cfg, ws))

    runner.run("propagate", {"power": cfg["cluster"]["power"]},
               [ws.path("graph.txt"), ws.path("features_base.bin")],
               [ws.path("propagated.bin")], lambda: _stage_propagate(cfg, ws))
    runner.run("fit", {**shared, "cluster": cfg["cluster"]},
               [ws.path("propagated.bin")],
               [ws.path("result.json"), ws.path("embedding.bin")],
               lambda: _stage_fit(cfg, ws))

    corp = corpus_mod.load_corpus(_require_corpus_path(cfg))
    if corp.labels is not None:
        runner.run("evaluate", shared,
                   [ws.path("result.json"), Path(cfg["paths"]["corpus"])],
                   [ws.path("metrics.json")], lambda: _stage_evaluate(cfg, ws))
    else:
        print("[evaluate] skipped (no ground-truth labels)")
    print("pipeline complete")
    return EXIT_OK


# ---------------------------------------------------------------- entry point


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-c", "--config", help="TOML configuration file")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config key (repeatable)")
    parser.add_argument("--workdir", help="artifact directory (default 'work')")
    parser.add_argument("--seed", type=int, help="master random seed")
    parser.add_argument("--threads", type=int, help="worker cap for parallel stages")
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="debug-level logging")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="docgraph",
        description="Document clustering via entity graphs, feature propagation, "
                    "and joint embedding-clustering.")
    sub = parser.add_subparsers(dest="command", required=True)
    names = [
        ("ingest", "validate and tokenize the corpus; write stats"),
        ("entities", "load entity annotations; write the normalized form"),
        ("train-w2v", "train word vectors on the tokenized corpus"),
        ("match", "find cross-document entity pairs above the similarity threshold"),
        ("graph", "build the entity-match document graph"),
        ("knn-graph", "build the cosine k-nearest-neighbor document graph"),
        ("features", "build document features (bag-of-words or stored embeddings)"),
        ("fetch-embeddings", "fetch document embeddings over HTTP with caching"),
        ("propagate", "smooth features over the document graph"),
        ("fit", "cluster the propagated features"),
        ("select-k", "suggest cluster counts from an over-segmented dendrogram"),
        ("select-p", "sweep propagation powers and pick the best"),
        ("evaluate", "score predicted clusters against ground truth"),
        ("synth", "generate a synthetic labeled corpus"),
        ("pipeline", "run every stage end to end with caching"),
    ]
    for name, help_text in names:
        p = sub.add_parser(name, help=help_text)
        _add_common(p)
        if name == "evaluate":
            p.add_argument("--pred", help="predictions JSON (default workdir/result.json)")
            p.add_argument("--truth", help="JSON file of labels (default corpus labels)")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = load_config(args.config, args.set, workdir=args.workdir,
                          seed=args.seed, threads=args.threads)
        ws = Workspace(cfg)
        command = args.command
        if command == "ingest":
            _stage_ingest(cfg, ws)
        elif command == "entities":
            _stage_entities(cfg, ws, require=True)
        elif command == "train-w2v":
            _stage_train_w2v(cfg, ws)
        elif command == "match":
            _stage_match(cfg, ws)
        elif command == "graph":
            _stage_graph(cfg, ws)
        elif command == "knn-graph":
            _stage_knn_graph(cfg, ws)
        elif command == "features":
            _stage_features(cfg, ws)
        elif command == "fetch-embeddings":
            _stage_fetch_embeddings(cfg, ws)
        elif command == "propagate":
            _stage_propagate(cfg, ws)
        elif command == "fit":
            _stage_fit(cfg, ws)
        elif command == "select-k":
            _stage_select_k(cfg, ws)
        elif command == "select-p":
            _stage_select_p(cfg, ws)
        elif command == "evaluate":
            _stage_evaluate(cfg, ws,
                            pred_path=Path(args.pred) if args.pred else None,
                            truth_path=args.truth)
        elif command == "synth":
            _stage_synth(cfg, ws)
        elif command == "pipeline":
            return cmd_pipeline(cfg)
        return EXIT_OK
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except NumericalError as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
