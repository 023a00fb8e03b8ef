"""Command-line interface for the whole pipeline.

Heavy imports (torch-backed modules) happen inside the commands that need
them so corpus extraction and syntax checking stay fast.
"""

from __future__ import annotations

import json
import sys
import time
from pathlib import Path

import click

from .errors import VerigragError


def _load_config(path) -> dict:
    if not path:
        return {}
    return json.loads(Path(path).read_text(encoding="utf-8"))


def _clamp_batch(config: dict, estimator_cls, n_items: int) -> None:
    """Cap the default batch size at the corpus size; explicit values win."""
    if "batch_size" in config:
        return
    import inspect
    default = inspect.signature(estimator_cls).parameters["batch_size"].default
    config["batch_size"] = max(2, min(default, n_items))


@click.group()
def main():
    """Structure-aware Verilog generation pipeline."""


# ---------------------------------------------------------------- extraction

@main.command()
@click.option("--in", "in_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_file", required=True, type=click.Path())
@click.option("--manifest", "manifest_file", required=True, type=click.Path())
@click.option("--threshold", default=0.8, show_default=True)
@click.option("--num-hashes", default=256, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--dedup/--no-dedup", "apply_dedup", default=True,
              show_default=True)
@click.option("--skipped", "skipped_file", type=click.Path(), default=None,
              help="Write per-file skip records (path, error_kind, message).")
@click.option("--timing-out", "timing_file", type=click.Path(), default=None,
              help="Write extraction wall-time JSON for benchmarking.")
def extract(in_dir, out_file, manifest_file, threshold, num_hashes, seed,
            apply_dedup, skipped_file, timing_file):
    """Extract data-path graphs from a directory of .v files."""
    from .netlist import DedupConfig, extract_corpus, write_graphs_jsonl
    from .netlist.corpus import write_manifest, write_skip_log
    started = time.perf_counter()
    result = extract_corpus(
        in_dir, DedupConfig(threshold=threshold, num_hashes=num_hashes,
                            seed=seed), apply_dedup=apply_dedup)
    write_graphs_jsonl(out_file, result.graphs)
    write_manifest(manifest_file, result)
    elapsed = time.perf_counter() - started
    if skipped_file:
        write_skip_log(skipped_file, result.skipped)
    if timing_file:
        Path(timing_file).write_text(json.dumps(
            {"seconds": elapsed, "modules": len(result.graphs)}) + "\n",
            encoding="utf-8")
    for record in result.skipped:
        click.echo(f"skipped {record.path} [{record.error_kind}]: "
                   f"{record.message}", err=True)
    click.echo(f"extracted {len(result.graphs)} graphs "
               f"(w_max={result.w_max}, skipped={len(result.skipped)})")


@main.command()
@click.option("--in", "in_file", required=True, type=click.Path(exists=True))
@click.option("--out", "out_file", required=True, type=click.Path())
@click.option("--threshold", default=0.8, show_default=True)
@click.option("--num-hashes", default=256, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--manifest", "manifest_file", type=click.Path(), default=None,
              help="Rewrite the manifest with the new graph count and "
                   "dedup settings.")
def dedup(in_file, out_file, threshold, num_hashes, seed, manifest_file):
    """Drop near-duplicate graph records from a graphs.jsonl corpus.

    Records are shingled over their canonical JSON text, a faithful proxy
    for the module structure they encode.
    """
    from .netlist.dedup import (MinHasher, estimate_jaccard, shingle_text)
    lines = [ln.strip() for ln in
             Path(in_file).read_text(encoding="utf-8").splitlines()
             if ln.strip()]
    hasher = MinHasher(num_hashes=num_hashes, seed=seed)
    kept_lines = []
    kept_sigs = []
    for line in lines:
        if threshold > 1.0:
            kept_lines.append(line)
            continue
        sig = hasher.signature(shingle_text(line))
        if any(estimate_jaccard(sig, s) >= threshold for s in kept_sigs):
            continue
        kept_lines.append(line)
        kept_sigs.append(sig)
    Path(out_file).write_text(
        "".join(line + "\n" for line in kept_lines), encoding="utf-8")
    if manifest_file:
        from .netlist.corpus import MANIFEST_SCHEMA_VERSION, load_manifest
        manifest = (load_manifest(manifest_file)
                    if Path(manifest_file).exists()
                    else {"schema_version": MANIFEST_SCHEMA_VERSION,
                          "w_max": 1})
        manifest["num_graphs"] = len(kept_lines)
        manifest["dedup"] = {"threshold": threshold,
                             "num_hashes": num_hashes, "seed": seed}
        Path(manifest_file).write_text(json.dumps(manifest) + "\n",
                                       encoding="utf-8")
    click.echo(f"kept {len(kept_lines)} of {len(lines)} graphs")


@main.command("check-syntax")
@click.argument("file", type=click.Path(exists=True))
def check_syntax(file):
    """Exit 0 when FILE parses within the supported Verilog subset."""
    from .netlist import VerilogSource, parse_verilog
    try:
        parse_verilog(VerilogSource.from_file(file))
    except VerigragError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    sys.exit(0)


@main.command("make-toy-corpus")
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--count", default=32, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--benchmark", "bench_dir", type=click.Path(), default=None,
              help="Also write benchmark task dirs for the first modules.")
@click.option("--tasks", "n_tasks", default=2, show_default=True)
def make_toy_corpus_cmd(out_dir, count, seed, bench_dir, n_tasks):
    """Generate a synthetic desk-scale corpus with description sidecars."""
    from .toydata import generate_toy_corpus, write_benchmark_tasks
    names = generate_toy_corpus(out_dir, count=count, seed=seed)
    if bench_dir:
        write_benchmark_tasks(bench_dir, out_dir, names[:n_tasks])
    click.echo(f"wrote {len(names)} modules to {out_dir}")


@main.command()
@click.option("--graphs", "graphs_file", required=True,
              type=click.Path(exists=True))
@click.option("--src", "src_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--out", "out_file", required=True, type=click.Path())
def pairs(graphs_file, src_dir, out_file):
    """Pair each graph with its description sidecar and module source.

    Modules without a ``<file>.txt`` description get one synthesized from
    their port list, flagged with ``"synthesized": true``.
    """
    from .netlist import (VerilogSource, module_code, parse_verilog,
                          read_graphs_jsonl)
    graphs = read_graphs_jsonl(graphs_file)
    by_sha: dict[str, dict[str, str]] = {}
    desc_by_sha: dict[str, str] = {}
    for path in sorted(Path(src_dir).rglob("*.v")):
        try:
            source = VerilogSource.from_file(path)
            modules = parse_verilog(source)
        except VerigragError:
            continue
        by_sha.setdefault(source.sha256, {})
        for ast in modules:
            by_sha[source.sha256][ast.name] = module_code(source, ast)
        sidecar = path.with_suffix(".txt")
        if sidecar.exists():
            desc_by_sha[source.sha256] = sidecar.read_text(
                encoding="utf-8").strip()

    records = []
    for graph in graphs:
        code = by_sha.get(graph.source_sha256, {}).get(graph.module_name)
        if code is None:
            continue
        description = desc_by_sha.get(graph.source_sha256)
        synthesized = description is None
        if synthesized:
            ins = [n.port_names[0] for n in graph.nodes if n.kind == "port_in"]
            outs = [n.port_names[0] for n in graph.nodes
                    if n.kind == "port_out"]
            description = (f"a hardware module named {graph.module_name} "
                           f"with inputs {' '.join(ins) or 'none'} and "
                           f"outputs {' '.join(outs) or 'none'}")
        records.append({"description": description,
                        "graph_id": graph.graph_id, "code": code,
                        "synthesized": synthesized})
    with open(out_file, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record))
            fh.write("\n")
    click.echo(f"wrote {len(records)} pairs")


# ------------------------------------------------------------------ training

def _read_pairs_file(path) -> list[dict]:
    records = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line:
            records.append(json.loads(line))
    return records


@main.command("train-gnn")
@click.option("--graphs", "graphs_file", required=True,
              type=click.Path(exists=True))
@click.option("--config", "config_file", type=click.Path(exists=True),
              default=None)
@click.option("--out", "out_file", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
def train_gnn(graphs_file, config_file, out_file, seed):
    """Contrastively pretrain the graph encoder on a graphs.jsonl corpus."""
    from .encoder import ContrastiveGraphEncoder
    from .netlist import read_graphs_jsonl
    graphs = read_graphs_jsonl(graphs_file)
    config = _load_config(config_file)
    config.setdefault("seed", seed)
    _clamp_batch(config, ContrastiveGraphEncoder, len(graphs))
    encoder = ContrastiveGraphEncoder(**config).fit(graphs)
    encoder.save(out_file)
    click.echo(f"trained encoder: loss {encoder.loss_trace_[0]:.4f} -> "
               f"{encoder.loss_trace_[-1]:.4f}")


@main.command()
@click.option("--graphs", "graphs_file", required=True,
              type=click.Path(exists=True))
@click.option("--ckpt", "ckpt_file", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_file", required=True, type=click.Path())
def embed(graphs_file, ckpt_file, out_file):
    """Encode every graph and write the embedding container."""
    from .embstore import write_embeddings
    from .encoder import ContrastiveGraphEncoder
    from .netlist import read_graphs_jsonl
    graphs = read_graphs_jsonl(graphs_file)
    encoder = ContrastiveGraphEncoder.load(ckpt_file)
    matrix = encoder.transform(graphs)
    write_embeddings(out_file, [g.graph_id for g in graphs], matrix)
    click.echo(f"wrote {matrix.shape[0]} embeddings of dim {matrix.shape[1]}")


def _pairs_with_embeddings(pairs_file, embeddings_file):
    from .embstore import read_embeddings
    records = _read_pairs_file(pairs_file)
    ids, matrix = read_embeddings(embeddings_file)
    row = {gid: i for i, gid in enumerate(ids)}
    out = []
    for record in records:
        gid = record["graph_id"]
        if gid not in row:
            raise click.ClickException(f"pair references unknown graph id "
                                       f"{gid!r}")
        out.append((record, matrix[row[gid]]))
    return out


@main.command("train-retriever")
@click.option("--pairs", "pairs_file", required=True,
              type=click.Path(exists=True))
@click.option("--embeddings", "emb_file", required=True,
              type=click.Path(exists=True))
@click.option("--mode", type=click.Choice(["teacher", "student"]),
              required=True)
@click.option("--teacher", "teacher_file", type=click.Path(exists=True),
              default=None)
@click.option("--mse-weight", default=1.0, show_default=True)
@click.option("--config", "config_file", type=click.Path(exists=True),
              default=None)
@click.option("--out", "out_file", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
def train_retriever(pairs_file, emb_file, mode, teacher_file, mse_weight,
                    config_file, out_file, seed):
    """Train the cross-attention teacher or distill the dual-encoder student."""
    from .retrieval import CrossAttentionTeacher, DistilledDualEncoder
    data = [(rec["description"], emb)
            for rec, emb in _pairs_with_embeddings(pairs_file, emb_file)]
    config = _load_config(config_file)
    config.setdefault("seed", seed)
    config.setdefault("graph_dim", data[0][1].shape[0])
    if mode == "teacher":
        _clamp_batch(config, CrossAttentionTeacher, len(data))
        model = CrossAttentionTeacher(**config).fit(data)
    else:
        if not teacher_file:
            raise click.ClickException("--mode student requires --teacher")
        teacher = CrossAttentionTeacher.load(teacher_file)
        _clamp_batch(config, DistilledDualEncoder, len(data))
        model = DistilledDualEncoder(teacher=teacher, mse_weight=mse_weight,
                                     **config).fit(data)
    model.save(out_file)
    click.echo(f"trained {mode}: final loss {model.loss_trace_[-1]:.4f}")


@main.group()
def index():
    """Build and query the retrieval index."""


@index.command("build")
@click.option("--embeddings", "emb_file", required=True,
              type=click.Path(exists=True))
@click.option("--student", "student_file", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_file", required=True, type=click.Path())
def index_build(emb_file, student_file, out_file):
    """Pre-encode graph embeddings through the student's graph tower."""
    import shutil
    from .embstore import read_embeddings
    from .retrieval import DistilledDualEncoder, build_index
    ids, matrix = read_embeddings(emb_file)
    student = DistilledDualEncoder.load(student_file)
    idx = build_index(list(zip(ids, matrix)), student)
    idx.save(out_file)
    # sidecar copy so `index query` can run without repeating --student
    shutil.copyfile(student_file, str(out_file) + ".student.ckpt")
    click.echo(f"indexed {len(idx)} graph vectors")


@index.command("query")
@click.option("--index", "index_file", required=True,
              type=click.Path(exists=True))
@click.option("--query", "query_text", required=True)
@click.option("--k", default=5, show_default=True)
@click.option("--student", "student_file", type=click.Path(exists=True),
              default=None,
              help="Defaults to the sidecar written by `index build`.")
def index_query(index_file, query_text, k, student_file):
    """Rank indexed graphs against a text query."""
    from .retrieval import DistilledDualEncoder, RetrievalIndex, retrieve
    idx = RetrievalIndex.load(index_file)
    student_file = student_file or str(index_file) + ".student.ckpt"
    if not Path(student_file).exists():
        raise click.ClickException("no student checkpoint; pass --student")
    student = DistilledDualEncoder.load(student_file)
    for gid, score in retrieve(idx, query_text, student, k):
        click.echo(f"{gid}\t{score:.6f}")


@main.command("train-lm")
@click.option("--pairs", "pairs_file", required=True,
              type=click.Path(exists=True))
@click.option("--config", "config_file", type=click.Path(exists=True),
              default=None)
@click.option("--out", "out_file", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
def train_lm_cmd(pairs_file, config_file, out_file, seed):
    """Pretrain the tiny frozen LM on (description, code) pairs."""
    from .veriformer import save_lm, train_lm
    records = _read_pairs_file(pairs_file)
    config = _load_config(config_file)
    config.setdefault("seed", seed)
    lm = train_lm([(r["description"], r["code"]) for r in records], **config)
    save_lm(out_file, lm)
    click.echo(f"trained LM with vocab {lm.tokenizer.vocab_size}")


@main.command("train-veriformer")
@click.option("--stage", type=click.Choice(["1", "2"]), required=True)
@click.option("--pairs", "pairs_file", required=True,
              type=click.Path(exists=True))
@click.option("--embeddings", "emb_file", required=True,
              type=click.Path(exists=True))
@click.option("--gnn", "gnn_file", type=click.Path(exists=True), default=None,
              help="Graph encoder checkpoint; recorded as frozen input.")
@click.option("--vf1", "vf1_file", type=click.Path(exists=True), default=None)
@click.option("--lm", "lm_file", type=click.Path(exists=True), default=None)
@click.option("--alpha", default=0.1, show_default=True)
@click.option("--config", "config_file", type=click.Path(exists=True),
              default=None)
@click.option("--out", "out_file", required=True, type=click.Path())
@click.option("--seed", default=0, show_default=True)
def train_veriformer(stage, pairs_file, emb_file, gnn_file, vf1_file, lm_file,
                     alpha, config_file, out_file, seed):
    """Stage 1 aligns graph embeddings with code; stage 2 fits soft prompts."""
    from . import checkpoint as ckpt
    from .veriformer import VeriFormerStage1, VeriFormerStage2, load_lm
    data = _pairs_with_embeddings(pairs_file, emb_file)
    config = _load_config(config_file)
    config.setdefault("seed", seed)
    gnn_hash = ckpt.file_hash(gnn_file) if gnn_file else None
    if stage == "1":
        config.setdefault("graph_dim", data[0][1].shape[0])
        _clamp_batch(config, VeriFormerStage1, len(data))
        model = VeriFormerStage1(**config).fit(
            [(emb, rec["code"]) for rec, emb in data])
        model.save(out_file)
        last = {k: v[-1] for k, v in model.traces_.items()}
        click.echo(f"stage-1 losses: {last}")
    else:
        if not vf1_file or not lm_file:
            raise click.ClickException("--stage 2 requires --vf1 and --lm")
        stage1 = VeriFormerStage1.load(vf1_file)
        lm = load_lm(lm_file)
        model = VeriFormerStage2(stage1=stage1, lm=lm, alpha=alpha,
                                 **config).fit(
            [(rec["description"], emb, rec["code"]) for rec, emb in data])
        model.save(out_file)
        click.echo(f"stage-2 total loss: {model.trace_['total'][-1]:.4f}")
    if gnn_file and ckpt.file_hash(gnn_file) != gnn_hash:
        raise click.ClickException("frozen graph encoder checkpoint changed")


# ---------------------------------------------------------------- generation

def _load_pipeline(index_file, emb_file, student_file, vf2_file, lm_file,
                   max_new_tokens):
    from .embstore import read_embeddings
    from .harness import GenerationPipeline
    from .retrieval import DistilledDualEncoder, RetrievalIndex
    from .veriformer import VeriFormerStage2, load_lm
    ids, matrix = read_embeddings(emb_file)
    pipeline = GenerationPipeline(
        student=DistilledDualEncoder.load(student_file),
        index=RetrievalIndex.load(index_file),
        embeddings={gid: matrix[i] for i, gid in enumerate(ids)},
        stage2=VeriFormerStage2.load(vf2_file),
        lm=load_lm(lm_file),
        max_new_tokens=max_new_tokens,
    )
    pipeline.validate()
    return pipeline


_pipeline_options = [
    click.option("--index", "index_file", required=True,
                 type=click.Path(exists=True)),
    click.option("--embeddings", "emb_file", required=True,
                 type=click.Path(exists=True)),
    click.option("--student", "student_file", required=True,
                 type=click.Path(exists=True)),
    click.option("--vf2", "vf2_file", required=True,
                 type=click.Path(exists=True)),
    click.option("--lm", "lm_file", required=True,
                 type=click.Path(exists=True)),
    click.option("--max-new-tokens", default=120, show_default=True),
]


def _with_pipeline_options(fn):
    for option in reversed(_pipeline_options):
        fn = option(fn)
    return fn


@main.command()
@click.option("--desc-file", "desc_file", required=True,
              type=click.Path(exists=True))
@click.option("--n", default=20, show_default=True)
@click.option("--temperatures", default="0.2,0.5,0.8", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_file", required=True, type=click.Path())
@_with_pipeline_options
def generate(desc_file, n, temperatures, seed, out_file, index_file, emb_file,
             student_file, vf2_file, lm_file, max_new_tokens):
    """Sample n candidates for one description and write samples.jsonl."""
    from .harness import generate_samples
    from .harness.tasks import BenchmarkTask
    pipeline = _load_pipeline(index_file, emb_file, student_file, vf2_file,
                              lm_file, max_new_tokens)
    description = Path(desc_file).read_text(encoding="utf-8").strip()
    task = BenchmarkTask(task_id=Path(desc_file).stem,
                         description=description, syntax_cmd="",
                         function_cmd="", timeout_s=30)
    temps = [float(t) for t in temperatures.split(",") if t]
    records = generate_samples(task, pipeline, n, temps, seed=seed)
    with open(out_file, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record.to_dict()))
            fh.write("\n")
    click.echo(f"wrote {len(records)} samples")


@main.command("eval")
@click.option("--benchmark", "bench_dir", required=True,
              type=click.Path(exists=True, file_okay=False))
@click.option("--k", "k_spec", default="1,5", show_default=True)
@click.option("--n", default=20, show_default=True)
@click.option("--temperatures", default="0.2,0.5,0.8", show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_file", required=True, type=click.Path())
@click.option("--samples-out", "samples_file", type=click.Path(),
              default=None)
@_with_pipeline_options
def eval_cmd(bench_dir, k_spec, n, temperatures, seed, out_file, samples_file,
             index_file, emb_file, student_file, vf2_file, lm_file,
             max_new_tokens):
    """Run the benchmark end-to-end and write the pass@k report."""
    from .harness import evaluate, write_report, write_samples_jsonl
    pipeline = _load_pipeline(index_file, emb_file, student_file, vf2_file,
                              lm_file, max_new_tokens)
    k_list = [int(k) for k in k_spec.split(",") if k]
    temps = [float(t) for t in temperatures.split(",") if t]
    report = evaluate(bench_dir, pipeline, n, k_list, temperatures=temps,
                      seed=seed)
    write_report(out_file, report)
    if samples_file:
        write_samples_jsonl(samples_file, report)
    click.echo(json.dumps(report["metrics"]))


if __name__ == "__main__":
    main()
