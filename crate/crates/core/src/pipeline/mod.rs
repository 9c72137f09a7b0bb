//! Staged batch pipeline driven by a [`RunConfig`].
//!
//! Each stage reads its inputs (configured files or earlier stage outputs
//! under the output root), writes its files to `<out>/<stage>/` atomically
//! and records itself in `<out>/manifest.json`. Re-running a stage drops
//! the records and output directories of the stages that consumed it.

mod config;
mod output;
mod tables;

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;

pub use config::{AnalysisConfig, CityInput, ClusteringConfig, InductionConfig, Inputs, RunConfig, Task};
pub use output::{csv_table, num, StageDir};

use crate::analysis::{
    assign_districts, confound_analysis, host_segments, labeled_set_adoption, load_geojson,
    neighbourhood_analysis, null_model, read_district_csv, room_type_validation, segment_social_scores,
    temporal_adoption, trend_slopes,
};
use crate::corpus::{
    filter_corpus, index_listings, ingest_listings, ingest_reviews, read_cleaned_corpus, write_cleaned_corpus,
    ListingIndex, Review,
};
use crate::embedding::{expand_lexicon, train_embeddings, EmbeddingModel};
use crate::error::{Error, Result};
use crate::induction::{
    fleiss_kappa_per_theme, lexicon_to_tsv, partition_all, read_labeled_sentences, read_lexicon,
    threshold_grid_report, word_stats, ThresholdGrid,
};
use crate::manifest::{FileDigest, RunManifest, StageRecord};
use crate::metrics::{gain_report, tf_gain, DEFAULT_MIN_TOTAL_TF};
use crate::taxonomy::{build_dictionary, elbow_select, load_dictionary, Dictionary, Tier};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Stage {
    Clean,
    Induce,
    Embed,
    Expand,
    Cluster,
    Analyze,
    Validate,
}

impl Stage {
    pub const ALL: [Stage; 7] = [
        Stage::Clean,
        Stage::Induce,
        Stage::Embed,
        Stage::Expand,
        Stage::Cluster,
        Stage::Analyze,
        Stage::Validate,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Stage::Clean => "clean",
            Stage::Induce => "induce",
            Stage::Embed => "embed",
            Stage::Expand => "expand",
            Stage::Cluster => "cluster",
            Stage::Analyze => "analyze",
            Stage::Validate => "validate-dictionary",
        }
    }

    /// Directory name under the output root.
    pub fn dir(self) -> &'static str {
        match self {
            Stage::Validate => "validate",
            s => s.name(),
        }
    }

    fn inputs(self) -> &'static [Stage] {
        match self {
            Stage::Clean | Stage::Induce => &[],
            Stage::Embed => &[Stage::Clean],
            Stage::Expand => &[Stage::Induce, Stage::Embed],
            Stage::Cluster => &[Stage::Expand],
            Stage::Analyze | Stage::Validate => &[Stage::Clean, Stage::Cluster],
        }
    }

    /// Every stage that consumes this one's outputs, directly or not.
    pub fn downstream(self) -> Vec<Stage> {
        let mut out: Vec<Stage> = Vec::new();
        for s in Stage::ALL {
            if s.inputs().iter().any(|i| *i == self || out.contains(i)) {
                out.push(s);
            }
        }
        out
    }
}

/// What a finished stage produced.
#[derive(Debug, Clone)]
pub struct StageSummary {
    pub stage: Stage,
    pub outputs: Vec<FileDigest>,
    pub parameters: serde_json::Value,
}

pub struct Pipeline {
    cfg: RunConfig,
    manifest: RunManifest,
}

fn missing_stage(stage: Stage, path: &Path) -> Error {
    Error::config(format!(
        "{} not found; run `{}` first",
        path.display(),
        stage.name()
    ))
}

impl Pipeline {
    /// Validate the configuration and open (or start) the run manifest.
    pub fn new(mut cfg: RunConfig) -> Result<Self> {
        cfg.validate_common()?;
        cfg.embedding.seed = cfg.seed;
        cfg.embedding.validate()?;
        let manifest = RunManifest::load_or_new(&cfg.out.join("manifest.json"), cfg.seed)?;
        Ok(Pipeline { cfg, manifest })
    }

    pub fn config(&self) -> &RunConfig {
        &self.cfg
    }

    pub fn manifest(&self) -> &RunManifest {
        &self.manifest
    }

    pub fn manifest_path(&self) -> PathBuf {
        self.cfg.out.join("manifest.json")
    }

    fn stage_file(&self, stage: Stage, name: &str) -> Result<PathBuf> {
        let p = self.cfg.out.join(stage.dir()).join(name);
        if p.is_file() {
            Ok(p)
        } else {
            Err(missing_stage(stage, &p))
        }
    }

    fn finish(
        &mut self,
        stage: Stage,
        dir: StageDir,
        inputs: Vec<PathBuf>,
        parameters: serde_json::Value,
    ) -> Result<StageSummary> {
        let inputs = inputs.iter().map(|p| FileDigest::of(p)).collect::<Result<Vec<_>>>()?;
        let outputs = dir.commit()?;
        let stale = stage.downstream();
        for s in &stale {
            let d = self.cfg.out.join(s.dir());
            if d.exists() {
                log::info!("removing stale {}", d.display());
                fs::remove_dir_all(&d).map_err(|e| Error::io(&d, e))?;
            }
        }
        let names: Vec<&str> = stale.iter().map(|s| s.name()).collect();
        self.manifest.seed = self.cfg.seed;
        self.manifest.record(
            StageRecord {
                stage: stage.name().to_owned(),
                inputs,
                outputs: outputs.clone(),
                parameters: parameters.clone(),
            },
            &names,
        );
        self.manifest.save(&self.manifest_path())?;
        log::info!("{} done ({} files)", stage.name(), outputs.len());
        Ok(StageSummary {
            stage,
            outputs,
            parameters,
        })
    }

    fn corpus(&self) -> Result<(Vec<Review>, PathBuf)> {
        let p = self.stage_file(Stage::Clean, "corpus.tsv")?;
        Ok((read_cleaned_corpus(&p)?, p))
    }

    fn dictionary(&self) -> Result<(Dictionary, PathBuf)> {
        let p = match &self.cfg.inputs.dictionary {
            Some(p) => p.clone(),
            None => self
                .stage_file(Stage::Cluster, "dictionary.dict")
                .map_err(|_| Error::config("no dictionary: set inputs.dictionary or run `cluster` first"))?,
        };
        Ok((load_dictionary(&p)?, p))
    }

    fn listings(&self) -> Result<(Option<ListingIndex>, Vec<PathBuf>)> {
        let mut all = Vec::new();
        let mut paths = Vec::new();
        for c in &self.cfg.inputs.cities {
            let Some(p) = &c.listings else { continue };
            let (ls, report) = ingest_listings(p, &c.name)?;
            if report.kept < report.rows {
                log::warn!("{}: kept {} of {} listings", c.name, report.kept, report.rows);
            }
            all.extend(ls);
            paths.push(p.clone());
        }
        Ok(((!paths.is_empty()).then(|| index_listings(all)), paths))
    }

    fn districts(&self, listings: &ListingIndex) -> Result<(HashMap<String, String>, Vec<PathBuf>)> {
        let mut map = HashMap::new();
        let mut paths = Vec::new();
        for c in &self.cfg.inputs.cities {
            let Some(p) = &c.districts else { continue };
            let ext = p.extension().and_then(|e| e.to_str()).unwrap_or("").to_ascii_lowercase();
            if ext == "csv" {
                map.extend(read_district_csv(p)?);
            } else {
                let ds = load_geojson(p, &self.cfg.analysis.district_property, &c.name)?;
                let (m, missed) = assign_districts(listings, &ds);
                if missed > 0 {
                    log::info!("{}: {missed} listings outside every district", c.name);
                }
                map.extend(m);
            }
            paths.push(p.clone());
        }
        Ok((map, paths))
    }

    /// Ingest, filter and tokenize every city's reviews.
    pub fn clean(&mut self) -> Result<StageSummary> {
        self.cfg.require_cities()?;
        let mut dir = StageDir::new(&self.cfg.out, Stage::Clean.dir())?;
        let mut all = Vec::new();
        let mut ingest_rows = Vec::new();
        let mut inputs = Vec::new();
        for c in &self.cfg.inputs.cities {
            let (rs, r) = ingest_reviews(&c.reviews, &c.name)?;
            ingest_rows.push(vec![
                c.name.clone(),
                r.rows.to_string(),
                r.kept.to_string(),
                r.malformed.to_string(),
                r.no_comment.to_string(),
                r.bad_date.to_string(),
            ]);
            all.extend(rs);
            inputs.push(c.reviews.clone());
        }
        let (kept, report) = filter_corpus(all, &self.cfg.filter)?;
        let mut buf = Vec::new();
        write_cleaned_corpus(&mut buf, &kept)?;
        dir.write("corpus.tsv", buf)?;
        dir.write("drop_report.txt", report.to_key_value())?;
        dir.write(
            "ingest_report.csv",
            csv_table(&["city", "rows", "kept", "malformed", "no_comment", "bad_date"], ingest_rows),
        )?;
        let params = json!({ "filter": self.cfg.filter, "kept": report.kept, "dropped": report.dropped() });
        self.finish(Stage::Clean, dir, inputs, params)
    }

    /// Seed lexicons from the labeled sentences.
    pub fn induce(&mut self) -> Result<StageSummary> {
        let path = self.cfg.require_labeled()?.to_path_buf();
        let th = self.cfg.induction.thresholds()?;
        let (sentences, themes) = read_labeled_sentences(&path)?;
        let partitions = partition_all(&sentences, &themes)?;
        let table = word_stats(&partitions)?;
        let lexicon = table.lexicon(&th);
        let mut dir = StageDir::new(&self.cfg.out, Stage::Induce.dir())?;
        dir.write("seed_lexicon.tsv", lexicon_to_tsv(&lexicon))?;
        dir.write("word_stats.csv", tables::word_stats(&table))?;
        dir.write("kappa.csv", tables::kappa(&fleiss_kappa_per_theme(&sentences, &themes)?))?;
        if self.cfg.induction.grid {
            let grid = threshold_grid_report(&table, &ThresholdGrid::published())?;
            dir.write("threshold_grid.csv", tables::threshold_grid(&grid))?;
        }
        let params = json!({
            "thresholds": th,
            "themes": themes,
            "sentences": sentences.len(),
            "lexicon_size": lexicon.len(),
        });
        self.finish(Stage::Induce, dir, vec![path], params)
    }

    /// Train word vectors on the cleaned corpus and labeled sentences, or
    /// load the configured ones.
    pub fn embed(&mut self) -> Result<StageSummary> {
        let (model, inputs, trained) = match &self.cfg.inputs.embeddings {
            Some(p) => (EmbeddingModel::load(p)?, vec![p.clone()], false),
            None => {
                let (reviews, p) = self.corpus()?;
                let mut docs: Vec<Vec<String>> = reviews.into_iter().map(|r| r.tokens).collect();
                let mut inputs = vec![p];
                if let Some(l) = &self.cfg.inputs.labeled {
                    let (ss, _) = read_labeled_sentences(l)?;
                    docs.extend(ss.into_iter().map(|s| s.tokens));
                    inputs.push(l.clone());
                }
                (train_embeddings(&docs, &self.cfg.embedding)?, inputs, true)
            }
        };
        let mut dir = StageDir::new(&self.cfg.out, Stage::Embed.dir())?;
        dir.write("vectors.txt", model.to_text())?;
        let params = json!({
            "trained": trained,
            "config": self.cfg.embedding,
            "vocabulary": model.len(),
            "dim": model.dim(),
        });
        self.finish(Stage::Embed, dir, inputs, params)
    }

    /// Grow the seed lexicons with embedding neighbours.
    pub fn expand(&mut self) -> Result<StageSummary> {
        let lp = self.stage_file(Stage::Induce, "seed_lexicon.tsv")?;
        let vp = self.stage_file(Stage::Embed, "vectors.txt")?;
        let seed = read_lexicon(&lp)?;
        let model = EmbeddingModel::load(&vp)?;
        let (lex, report) = expand_lexicon(&seed, &model, &self.cfg.expansion)?;
        let mut dir = StageDir::new(&self.cfg.out, Stage::Expand.dir())?;
        dir.write("lexicon.tsv", lexicon_to_tsv(&lex))?;
        dir.write(
            "expansion_report.json",
            serde_json::to_string_pretty(&report).expect("report serialises"),
        )?;
        let params = json!({ "expansion": self.cfg.expansion, "seed_size": seed.len(), "size": lex.len() });
        self.finish(Stage::Expand, dir, vec![lp, vp], params)
    }

    /// Cluster each theme's words into level-3 categories and write the
    /// dictionary.
    pub fn cluster(&mut self) -> Result<StageSummary> {
        let lp = self.stage_file(Stage::Expand, "lexicon.tsv")?;
        let vp = self.stage_file(Stage::Embed, "vectors.txt")?;
        let lex = read_lexicon(&lp)?;
        let model = EmbeddingModel::load(&vp)?;
        let cc = &self.cfg.clustering;
        let mut theme_clusters: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
        let mut elbow_rows = Vec::new();
        for theme in &lex.themes {
            let words = lex.words_of(theme);
            let (known, oov): (Vec<&str>, Vec<&str>) = words.iter().partition(|w| model.contains(w));
            let points: Vec<Vec<f64>> = known
                .iter()
                .map(|w| model.vector(w).expect("known word").iter().map(|x| *x as f64).collect())
                .collect();
            let ks: Vec<usize> = (cc.k_min..=cc.k_max.min(points.len())).collect();
            let mut clusters: Vec<Vec<String>> = if ks.len() >= 3 {
                let curve = elbow_select(&points, &ks, self.cfg.seed, cc.restarts)?;
                for (k, w) in curve.ks.iter().zip(&curve.wcss) {
                    elbow_rows.push(vec![theme.clone(), k.to_string(), num(*w), (*k == curve.chosen).to_string()]);
                }
                let fit = curve.chosen_fit();
                let mut cs = vec![Vec::new(); curve.chosen];
                for (w, &a) in known.iter().zip(&fit.assignments) {
                    cs[a].push((*w).to_owned());
                }
                cs.retain(|c| !c.is_empty());
                cs
            } else if !known.is_empty() {
                log::warn!("{theme}: {} words, too few for an elbow curve; one category", known.len());
                vec![known.iter().map(|w| (*w).to_owned()).collect()]
            } else {
                Vec::new()
            };
            if !oov.is_empty() {
                log::warn!("{theme}: {} words without vectors join its largest category", oov.len());
                if clusters.is_empty() {
                    clusters.push(Vec::new());
                }
                let largest = (0..clusters.len())
                    .max_by(|&a, &b| clusters[a].len().cmp(&clusters[b].len()).then(b.cmp(&a)))
                    .expect("non-empty");
                clusters[largest].extend(oov.iter().map(|w| (*w).to_owned()));
            }
            for c in &mut clusters {
                c.sort();
            }
            if clusters.is_empty() {
                log::warn!("{theme}: no words, theme left without categories");
            }
            theme_clusters.insert(theme.clone(), clusters);
        }
        let dict = build_dictionary(&theme_clusters, &cc.level2, &cc.names)?;
        let mut dir = StageDir::new(&self.cfg.out, Stage::Cluster.dir())?;
        dir.write("dictionary.dict", dict.to_text())?;
        dir.write("elbow.csv", csv_table(&["theme", "k", "wcss", "chosen"], elbow_rows))?;
        dir.write("categories.csv", tables::dictionary_words(&dict))?;
        self.manifest.dictionary_sha256 = Some(dict.content_hash());
        let (l1, l2, l3) = dict.category_counts();
        let params = json!({
            "k_min": cc.k_min,
            "k_max": cc.k_max,
            "restarts": cc.restarts,
            "categories": [l1, l2, l3],
            "words": dict.word_count(),
        });
        self.finish(Stage::Cluster, dir, vec![lp, vp], params)
    }

    /// Run the selected analyses.
    pub fn analyze(&mut self, tasks: &[Task]) -> Result<StageSummary> {
        let mut tasks = tasks.to_vec();
        tasks.sort();
        tasks.dedup();
        if tasks.is_empty() {
            return Err(Error::config("no analyses selected"));
        }
        self.cfg.validate_analysis(&tasks)?;
        let (dict, dp) = self.dictionary()?;
        let (reviews, cp) = self.corpus()?;
        let needs_listings = tasks
            .iter()
            .any(|t| matches!(t, Task::Confounds | Task::Roomtype | Task::Segments | Task::Neighbourhoods));
        let (listings, mut inputs) = if needs_listings { self.listings()? } else { (None, Vec::new()) };
        inputs.extend([dp, cp]);
        let a = &self.cfg.analysis;
        let mut dir = StageDir::new(&self.cfg.out, Stage::Analyze.dir())?;

        for task in &tasks {
            log::info!("analysis: {}", task.name());
            match task {
                Task::Temporal => {
                    let mut slopes = Vec::new();
                    for tier in RunConfig::tier_list() {
                        let t = temporal_adoption(&reviews, &dict, tier)?;
                        dir.write(&format!("temporal_level{}.csv", tier.level()), tables::adoption(&t))?;
                        slopes.extend(trend_slopes(&t));
                    }
                    dir.write("temporal_slopes.csv", tables::slope_csv(tables::slope_rows(&slopes)))?;
                }
                Task::Nullmodel => {
                    let r = null_model(&reviews, &dict, self.cfg.seed, a.early, a.late)?;
                    dir.write("nullmodel_shuffled.csv", tables::adoption(&r.shuffled))?;
                    dir.write("nullmodel_slopes.csv", tables::null_slopes(&r))?;
                    dir.write("nullmodel_wilcoxon.csv", tables::wilcoxon(&r.comparisons))?;
                }
                Task::Confounds => {
                    let buckets = self.cfg.length_buckets()?;
                    let r = confound_analysis(&reviews, &dict, &buckets, listings.as_ref(), Tier::Level1)?;
                    dir.write("confounds_length.csv", tables::adoption(&r.by_length))?;
                    if let Some(t) = &r.by_room_type {
                        dir.write("confounds_room_type.csv", tables::adoption(t))?;
                    }
                    let mut rows = tables::slope_rows(&r.length_slopes);
                    rows.extend(tables::slope_rows(&r.room_type_slopes));
                    dir.write("confounds_slopes.csv", tables::slope_csv(rows))?;
                }
                Task::Roomtype => {
                    let ls = listings.as_ref().expect("validated");
                    dir.write("room_type.csv", tables::room_type(&room_type_validation(&reviews, ls, &dict)?))?;
                }
                Task::Segments => {
                    let ls = listings.as_ref().expect("validated");
                    let seg = host_segments(ls, &reviews);
                    if !seg.unknown.is_empty() {
                        log::warn!("{} hosts without a join date left out", seg.unknown.len());
                    }
                    let scores = segment_social_scores(&reviews, ls, &seg, &dict, a.segments_by_city)?;
                    dir.write("hosts.csv", tables::hosts(&seg))?;
                    dir.write("adoption_curve.csv", tables::adoption_curve(&seg))?;
                    dir.write("segment_scores.csv", tables::segment_scores(&scores))?;
                }
                Task::Neighbourhoods => {
                    let ls = listings.as_ref().expect("validated");
                    let (map, paths) = self.districts(ls)?;
                    inputs.extend(paths);
                    let r = neighbourhood_analysis(&reviews, ls, &map, &dict)?;
                    dir.write("neighbourhoods.csv", tables::districts(&r))?;
                    dir.write("neighbourhood_correlation.csv", tables::correlations(&r))?;
                }
                Task::Tfgain => {
                    let mut scopes: Vec<(String, Vec<&Review>)> = vec![("all".into(), reviews.iter().collect())];
                    for c in &self.cfg.inputs.cities {
                        scopes.push((c.name.clone(), reviews.iter().filter(|r| r.city == c.name).collect()));
                    }
                    let mut words = Vec::new();
                    let mut reports = Vec::new();
                    for (scope, rs) in scopes {
                        let pick = |range: crate::analysis::YearRange| -> Vec<&Review> {
                            rs.iter()
                                .copied()
                                .filter(|r| r.year().is_some_and(|y| range.contains(y)))
                                .collect()
                        };
                        let (late, early) = (pick(a.late), pick(a.early));
                        if late.is_empty() || early.is_empty() {
                            log::warn!("tfgain {scope}: no reviews in one of the periods, skipped");
                            continue;
                        }
                        let entries = tf_gain(&late, &early, DEFAULT_MIN_TOTAL_TF)?;
                        reports.push((scope.clone(), gain_report(&entries, &dict, a.tfgain_top_k)));
                        words.push((scope, entries));
                    }
                    dir.write("tfgain_words.csv", tables::gain_words(&words, &dict))?;
                    dir.write("tfgain_density.csv", tables::gain_density(&reports))?;
                    dir.write("tfgain_extremes.csv", tables::gain_extremes(&reports))?;
                }
            }
        }
        self.manifest.dictionary_sha256 = Some(dict.content_hash());
        let names: Vec<&str> = tasks.iter().map(|t| t.name()).collect();
        let params = json!({ "tasks": names, "analysis": self.cfg.analysis });
        self.finish(Stage::Analyze, dir, inputs, params)
    }

    /// Labeled-set adoption and room-type relative change.
    pub fn validate_dictionary(&mut self) -> Result<StageSummary> {
        let (dict, dp) = self.dictionary()?;
        let mut inputs = vec![dp];
        let mut dir = StageDir::new(&self.cfg.out, Stage::Validate.dir())?;
        let mut done = false;
        if let Some(l) = &self.cfg.inputs.labeled {
            let (ss, themes) = read_labeled_sentences(l)?;
            dir.write("labeled_sets.csv", tables::labeled_sets(&labeled_set_adoption(&ss, &themes, &dict)?))?;
            inputs.push(l.clone());
            done = true;
        }
        let (listings, paths) = self.listings()?;
        if let Some(ls) = listings {
            let (reviews, cp) = self.corpus()?;
            dir.write("room_type.csv", tables::room_type(&room_type_validation(&reviews, &ls, &dict)?))?;
            inputs.extend(paths);
            inputs.push(cp);
            done = true;
        }
        if !done {
            return Err(Error::config("validation needs inputs.labeled or city listings"));
        }
        self.manifest.dictionary_sha256 = Some(dict.content_hash());
        self.finish(Stage::Validate, dir, inputs, json!({}))
    }

    /// Every stage in order, with all analyses.
    pub fn run_all(&mut self) -> Result<Vec<StageSummary>> {
        Ok(vec![
            self.clean()?,
            self.induce()?,
            self.embed()?,
            self.expand()?,
            self.cluster()?,
            self.analyze(&Task::ALL)?,
            self.validate_dictionary()?,
        ])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn downstream_sets() {
        let names = |s: Stage| s.downstream().into_iter().map(Stage::name).collect::<Vec<_>>();
        assert_eq!(names(Stage::Clean), ["embed", "expand", "cluster", "analyze", "validate-dictionary"]);
        assert_eq!(names(Stage::Induce), ["expand", "cluster", "analyze", "validate-dictionary"]);
        assert_eq!(names(Stage::Cluster), ["analyze", "validate-dictionary"]);
        assert!(names(Stage::Analyze).is_empty());
    }
}
