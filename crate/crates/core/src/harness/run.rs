use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::rc::Rc;

use serde::{Deserialize, Serialize};

use super::cache::{Cache, CacheKind};
use super::checks::{self, identity_operator_indices};
use super::config::{CheckName, Instance, VerificationConfig};
use super::oracle::{load_oracle, OracleTable};
use super::report::{InstanceReport, VerificationReport, SCHEMA_VERSION};
use super::Result;
use crate::hecke::{hecke_t, CuspidalHecke, OperatorMatrix};
use crate::iwasawa::{LambdaModule, LambdaModuleRecord, LambdaRing};
use crate::modsym::{build_space, LevelParams, SpaceRecord, SymbolSpace};
use crate::ordinary::{default_coefficient_bound, OrdinaryLevel, PacketRecord};

/// Lazily built, cache-backed levels `N p^r` of one instance. `r = 0` is
/// the tame level itself.
pub struct LevelPipeline<'a> {
    instance: Instance,
    cache: &'a Cache,
    precision: u32,
    n_max: Option<u64>,
    spaces: RefCell<BTreeMap<u32, Rc<SymbolSpace>>>,
    levels: RefCell<BTreeMap<u32, Rc<OrdinaryLevel>>>,
}

impl<'a> LevelPipeline<'a> {
    pub fn new(instance: Instance, cache: &'a Cache, precision: u32, n_max: Option<u64>) -> Self {
        Self { instance, cache, precision, n_max, spaces: RefCell::default(), levels: RefCell::default() }
    }

    pub fn instance(&self) -> Instance {
        self.instance
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn params(&self, r: u32) -> Result<LevelParams> {
        self.instance.params(r)
    }

    pub fn level_number(&self, r: u32) -> u64 {
        self.instance.tame * self.instance.prime.pow(r)
    }

    pub fn space(&self, r: u32) -> Result<Rc<SymbolSpace>> {
        if let Some(s) = self.spaces.borrow().get(&r) {
            return Ok(s.clone());
        }
        let params = self.params(r)?;
        let key = Cache::key(CacheKind::Space, params.level(), Some(params), None, "space");
        let record: SpaceRecord = self.cache.get_or_build(CacheKind::Space, &key, || Ok(build_space(params)?.record()))?;
        let space = Rc::new(SymbolSpace::from_record(record)?);
        self.spaces.borrow_mut().insert(r, space.clone());
        Ok(space)
    }

    pub fn level(&self, r: u32) -> Result<Rc<OrdinaryLevel>> {
        if let Some(l) = self.levels.borrow().get(&r) {
            return Ok(l.clone());
        }
        let params = self.params(r)?;
        let space = self.space(r)?;
        let n_max = self.n_max.unwrap_or_else(|| default_coefficient_bound(&space, params.prime));
        let hecke = CuspidalHecke::new((*space).clone())?;
        let mut indices: BTreeSet<u64> = (2..=n_max).collect();
        indices.insert(params.prime);
        indices.extend(identity_operator_indices());
        for n in indices {
            let label = format!("T({n})");
            let key = Cache::key(CacheKind::Operator, params.level(), Some(params), None, &label);
            let op: OperatorMatrix = self.cache.get_or_build(CacheKind::Operator, &key, || Ok(hecke_t(&space, n)))?;
            hecke.seed_t(n, &op)?;
        }
        let level = Rc::new(OrdinaryLevel::from_hecke(hecke, self.precision, Some(n_max))?);
        log::info!("level {} ready: ordinary rank {} of {}", params.level(), level.decomposition().rank(), level.hecke().dim());
        self.levels.borrow_mut().insert(r, level.clone());
        Ok(level)
    }

    /// The ordinary summand at `N p^r` with `<1 + p>` acting, as a module
    /// over the group ring of `(1 + pZ) / (1 + p^r Z)`.
    pub fn lambda_module(&self, r: u32) -> Result<LambdaModule> {
        let params = self.params(r)?;
        let key = Cache::key(CacheKind::LambdaModule, params.level(), Some(params), Some(self.precision), "gamma");
        let record: LambdaModuleRecord = self.cache.get_or_build(CacheKind::LambdaModule, &key, || {
            let ring = LambdaRing::new(params.prime, r, self.precision)?;
            Ok(LambdaModule::new(ring, self.level(r)?.gamma_action()?)?.record())
        })?;
        Ok(LambdaModule::from_record(&record)?)
    }
}

fn run_instance(
    instance: Instance,
    cache: &Cache,
    config: &VerificationConfig,
    checks: &[CheckName],
    oracle: Option<&OracleTable>,
) -> InstanceReport {
    let pipeline = LevelPipeline::new(instance, cache, config.precision, config.n_max);
    let mut entries = Vec::new();
    for &check in checks {
        log::info!("instance {instance}: running {check}");
        entries.extend(match check {
            CheckName::Structure => checks::check_structure(&pipeline),
            CheckName::HeckeIdentities => checks::check_hecke_identities(&pipeline),
            CheckName::Idempotent => checks::check_idempotent(&pipeline),
            CheckName::RankDuality => checks::check_rank_duality(&pipeline),
            CheckName::Control => checks::check_control(&pipeline),
            CheckName::Stabilization => checks::check_stabilization(&pipeline),
            CheckName::Oracle => match oracle {
                Some(table) => checks::check_oracle(&pipeline, table),
                None => Vec::new(),
            },
        });
    }
    let passed = entries.iter().all(|e| e.passed);
    InstanceReport { instance, checks: entries, passed }
}

/// Runs the selected checks on every instance. Instances run on separate
/// threads; the report does not depend on scheduling.
pub fn run(config: &VerificationConfig) -> Result<VerificationReport> {
    config.validate()?;
    let oracle = config.oracle.as_deref().map(load_oracle).transpose()?;
    let cache = Cache::new(config.cache_dir.clone());
    let checks = config.selected_checks();
    let width = std::thread::available_parallelism().map_or(1, |n| n.get());
    let mut reports = Vec::with_capacity(config.instances.len());
    for chunk in config.instances.chunks(width) {
        std::thread::scope(|s| {
            let handles: Vec<_> = chunk
                .iter()
                .map(|&inst| {
                    let (cache, checks, oracle) = (&cache, &checks, oracle.as_ref());
                    s.spawn(move || run_instance(inst, cache, config, checks, oracle))
                })
                .collect();
            reports.extend(handles.into_iter().map(|h| h.join().expect("verification thread panicked")));
        });
    }
    let stats = cache.stats();
    log::info!("cache: {} hits, {} misses, {} rebuilt", stats.hits, stats.misses, stats.rebuilt);
    Ok(VerificationReport::new(config.precision, config.n_max, reports))
}

/// Summary of one level written by [`build`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelSummary {
    pub level: u64,
    pub params: LevelParams,
    pub symbol_classes: usize,
    pub quotient_rank: usize,
    pub cuspidal_rank: usize,
    pub ordinary_rank: usize,
    pub n_max: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LevelPackets {
    pub level: u64,
    pub prime: u64,
    pub precision: u32,
    pub packets: Vec<PacketRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Eigen packets of every built level, as written by `build --packets`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PacketExport {
    pub schema_version: u32,
    pub levels: Vec<LevelPackets>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildSummary {
    pub levels: Vec<LevelSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packets: Option<PacketExport>,
}

/// Builds (and caches) spaces, operators and group-ring modules for every
/// level `N p^r`, `1 <= r <= r_max`, optionally extracting eigen packets.
pub fn build(config: &VerificationConfig, with_packets: bool) -> Result<BuildSummary> {
    config.validate()?;
    let cache = Cache::new(config.cache_dir.clone());
    let mut levels = Vec::new();
    let mut exported = Vec::new();
    for &inst in &config.instances {
        let pipeline = LevelPipeline::new(inst, &cache, config.precision, config.n_max);
        for r in 1..=inst.r_max {
            let space = pipeline.space(r)?;
            let level = pipeline.level(r)?;
            pipeline.lambda_module(r)?;
            levels.push(LevelSummary {
                level: level.level(),
                params: level.params(),
                symbol_classes: space.symbols().len(),
                quotient_rank: space.rank(),
                cuspidal_rank: level.hecke().dim(),
                ordinary_rank: level.decomposition().rank(),
                n_max: level.n_max(),
            });
            if with_packets {
                let found = level.algebra().and_then(|a| level.packets(&a));
                let (packets, error) = match found {
                    Ok(ps) => (ps.iter().map(|p| p.record()).collect(), None),
                    Err(e) => (Vec::new(), Some(e.to_string())),
                };
                exported.push(LevelPackets { level: level.level(), prime: inst.prime, precision: config.precision, packets, error });
            }
        }
    }
    let stats = cache.stats();
    log::info!("cache: {} hits, {} misses, {} rebuilt", stats.hits, stats.misses, stats.rebuilt);
    let packets = with_packets.then_some(PacketExport { schema_version: SCHEMA_VERSION, levels: exported });
    Ok(BuildSummary { levels, packets })
}
