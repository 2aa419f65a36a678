use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use xwalk_core::eval::trec::{self, read_frequencies, read_qrels, read_queries, read_run, write_run};
use xwalk_core::eval::{assign_bins, evaluate, generate_synthetic_log, rrf_fuse, RunList, SyntheticLogSpec};
use xwalk_core::{
    batch_retrieve, collate, read_graph, read_interaction_log, retrieve, query_rng, write_graph, Bm25, Bm25Params,
    Coefficients, Graph, NodeKind, Options, RankedResult, WalkError,
};

use crate::args::*;
use crate::error::{at_path, Failure};

fn open(path: &Path) -> Result<BufReader<File>, Failure> {
    File::open(path).map(BufReader::new).map_err(at_path(path))
}

/// Writes a whole file or reports the path that failed.
fn write_file(path: &Path, fill: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>) -> Result<(), Failure> {
    let file = File::create(path).map_err(at_path(path))?;
    let mut w = BufWriter::new(file);
    fill(&mut w).and_then(|()| w.flush()).map_err(at_path(path))
}

pub fn load_graph(path: &Path) -> Result<Graph, Failure> {
    read_graph(&mut open(path)?).map_err(at_path(path))
}

fn load_records(path: &Path) -> Result<Vec<xwalk_core::InteractionRecord>, Failure> {
    let parsed = read_interaction_log(open(path)?).map_err(at_path(path))?;
    if !parsed.errors.is_empty() {
        log::warn!("{}: skipped {} malformed of {} lines", path.display(), parsed.errors.len(), parsed.lines);
    }
    Ok(parsed.records)
}

pub fn build(a: &BuildArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let coefficients = Coefficients::new(a.click, a.cart, a.purchase)?;
    let records = load_records(&a.log)?;
    let graph: Graph = xwalk_core::build_graph(&collate(&records), &Options { coefficients, extend: !a.no_extend })?;
    write_file(&a.output, |w| write_graph(&graph, w).map(drop))?;
    let counts = graph.kind_counts();
    for kind in NodeKind::ALL {
        writeln!(out, "{}\t{}", kind.as_str(), counts.get(kind))?;
    }
    writeln!(out, "edges\t{}", graph.edge_count())?;
    Ok(())
}

pub fn query(a: &QueryArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let params = a.walk.params()?;
    let graph = load_graph(&a.graph)?;
    let result = retrieve(&graph, &a.text, &params, &mut query_rng(a.walk.seed(), &a.text))?;
    for h in &result.hits {
        writeln!(out, "{}\t{}", h.listing, h.score)?;
    }
    if let Some(path) = &a.run_output {
        let mut run = RunList::new();
        run.insert_result(a.qid.clone(), &result);
        write_file(path, |w| write_run(&run, &a.tag, w))?;
    }
    Ok(())
}

pub fn run(a: &RunArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let params = a.walk.params()?;
    let graph = load_graph(&a.graph)?;
    let queries = read_queries(open(&a.queries)?).map_err(at_path(&a.queries))?;
    let texts: Vec<&str> = queries.iter().map(|(_, t)| t.as_str()).collect();
    let results = batch_retrieve(&graph, &texts, &params, a.walk.seed());
    let mut run = RunList::new();
    let mut cold = 0usize;
    for ((qid, text), result) in queries.iter().zip(results) {
        match result {
            Ok(r) => run.insert_result(qid.clone(), &r),
            Err(WalkError::NoSuchQuery(_)) => {
                log::warn!("{qid}: cold start, no results for {text:?}");
                cold += 1;
            }
            Err(e) => return Err(e.into()),
        }
    }
    write_file(&a.run_output, |w| write_run(&run, &a.tag, w))?;
    writeln!(out, "queries\t{}\nanswered\t{}\ncold_start\t{cold}", queries.len(), run.len())?;
    Ok(())
}

pub fn bm25(a: &Bm25Args, out: &mut dyn Write) -> Result<(), Failure> {
    let params = Bm25Params { k1: a.k1, b: a.b };
    if a.topk == 0 {
        return Err(Failure::usage("--topk must be at least 1"));
    }
    let docs: Vec<(String, String)> = match (&a.corpus, &a.log) {
        (Some(path), _) => read_queries(open(path)?).map_err(at_path(path))?,
        (None, Some(path)) => {
            let records = load_records(path)?;
            collate(&records).titles().map(|(id, t)| (id.to_string(), t.to_string())).collect()
        }
        (None, None) => return Err(Failure::usage("one of --corpus or --log is required")),
    };
    let index = Bm25::build(docs.iter().map(|(id, t)| (id.clone(), t.as_str())), params)?;
    let queries = read_queries(open(&a.queries)?).map_err(at_path(&a.queries))?;
    let mut run = RunList::new();
    for (qid, text) in &queries {
        let result: RankedResult<f64> = index.search(text, a.topk);
        run.insert_result(qid.clone(), &result);
    }
    write_file(&a.run_output, |w| write_run(&run, &a.tag, w))?;
    writeln!(out, "documents\t{}\nqueries\t{}", index.doc_count(), queries.len())?;
    Ok(())
}

/// Splits `NAME=PATH`; a bare path is named after its file stem.
fn named_run(spec: &str) -> (String, PathBuf) {
    match spec.split_once('=') {
        Some((name, path)) if !name.is_empty() => (name.to_string(), PathBuf::from(path)),
        _ => {
            let path = PathBuf::from(spec);
            let name = path.file_stem().map_or_else(|| spec.to_string(), |s| s.to_string_lossy().into_owned());
            (name, path)
        }
    }
}

pub fn eval(a: &EvalArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let qrels = read_qrels(open(&a.qrels)?).map_err(at_path(&a.qrels))?;
    let bins = match &a.frequencies {
        Some(path) => Some(assign_bins(&read_frequencies(open(path)?).map_err(at_path(path))?)),
        None => None,
    };
    let mut runs = Vec::with_capacity(a.runs.len());
    for spec in &a.runs {
        let (name, path) = named_run(spec);
        let run = read_run(open(&path)?).map_err(at_path(&path))?;
        runs.push((name, run));
    }
    let borrowed: Vec<(&str, &RunList)> = runs.iter().map(|(n, r)| (n.as_str(), r)).collect();
    let report = evaluate(&borrowed, &qrels, bins.as_ref());
    write!(out, "{report}\n{}", report.key_values())?;
    Ok(())
}

pub fn fuse(a: &FuseArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let mut runs = Vec::with_capacity(a.runs.len());
    for path in &a.runs {
        runs.push(read_run(open(path)?).map_err(at_path(path))?);
    }
    let borrowed: Vec<&RunList> = runs.iter().collect();
    let mut fused = rrf_fuse(&borrowed, a.kappa)?;
    if let Some(k) = a.topk {
        let mut cut = RunList::new();
        for (qid, list) in fused.iter() {
            cut.insert(qid, list.iter().take(k).cloned());
        }
        fused = cut;
    }
    write_file(&a.output, |w| write_run(&fused, &a.tag, w))?;
    writeln!(out, "queries\t{}", fused.len())?;
    Ok(())
}

pub fn synth(a: &SynthArgs, out: &mut dyn Write) -> Result<(), Failure> {
    let spec = SyntheticLogSpec {
        num_queries: a.num_queries,
        num_listings: a.num_listings,
        num_shops: a.num_shops,
        tag_vocab_size: a.tag_vocab_size,
        cluster_count: a.clusters,
        zipf_exponent: a.zipf_exponent,
        events: a.events,
        eval_queries: a.eval_queries,
        novel_fraction: a.novel_fraction,
        seed: a.seed,
    };
    let data = generate_synthetic_log(&spec)?;
    let dir = &a.output_dir;
    fs::create_dir_all(dir).map_err(at_path(dir))?;
    write_file(&dir.join("log.jsonl"), |w| {
        data.log.iter().try_for_each(|r| writeln!(w, "{}", r.to_json_line()))
    })?;
    write_file(&dir.join("queries.tsv"), |w| trec::write_queries(&data.eval_queries, w))?;
    write_file(&dir.join("qrels.txt"), |w| trec::write_qrels(&data.qrels, w))?;
    write_file(&dir.join("frequencies.txt"), |w| trec::write_frequencies(&data.frequencies, w))?;
    let cold = data.cold_start_instances().len();
    let distinct: BTreeMap<&str, ()> = data.log.iter().map(|r| (r.query.as_str(), ())).collect();
    writeln!(
        out,
        "events\t{}\ntrained_queries\t{}\neval_instances\t{}\ncold_start_instances\t{cold}",
        data.log.len(),
        distinct.len(),
        data.eval_queries.len()
    )?;
    Ok(())
}
