"""Experiment runner: multi-seed training, policy evaluation, ablations.

``run_training`` trains one agent per seed on a fresh environment, logs one
curve row per episode, checkpoints the final policy, sweeps the single-dose
reference grid, and writes a report directory:

    trial_<seed>_curve.csv        per-episode metrics for one seed
    trial_<seed>_checkpoint.json  final policy (reloadable)
    curves.csv                    per-episode mean and variance across seeds
    tables.csv                    reference grid and final policies, one row
                                  per method (N, leaching, uptake, topwt,
                                  cumulative reward)
    episodes.jsonl                day-by-day log of the evaluated episodes
    manifest.json                 config snapshot/hash, trial status,
                                  convergence episodes, summaries

Everything written to the CSV outputs is deterministic for a fixed config and
seed list. Trials that produce non-finite numbers are marked failed and
excluded from aggregates but stay in the manifest.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .agents import (DqnAgent, DqnHyper, SacAgent, SacHyper, VStagePolicy,
                     discretize_action)
from .env import DISCRETE_ACTIONS_KG, NitrogenEnv, ScenarioConfig
from .errors import ConfigError
from .reward import RewardConfig, daily_reward
from .state import ObservationMask, normalize_observation, observe

CURVE_COLUMNS = ("episode", "epsilon", "cumulative_reward", "total_N",
                 "total_leach", "topwt")
TABLE_COLUMNS = ("method", "n_input", "leaching", "uptake", "topwt",
                 "cumulative_reward")


@dataclass(frozen=True)
class ExperimentConfig:
    scenario: ScenarioConfig
    agent_kind: str = "dqn"
    hyper: DqnHyper | SacHyper = field(default_factory=DqnHyper)
    trials: int = 5
    seeds: tuple[int, ...] = (1, 2, 3, 4, 5)
    observation: str = "full"
    baseline_grid: tuple[float, ...] = tuple(float(x) for x in range(0, 321, 40))
    out_dir: Path = Path("run_output")

    def __post_init__(self):
        if self.trials != len(self.seeds):
            raise ConfigError("trials must equal the number of seeds")
        if any(b < 0 for b in self.baseline_grid):
            raise ConfigError("baseline amounts must be nonnegative")
        if self.agent_kind not in ("dqn", "sac"):
            raise ConfigError(f"unknown agent kind {self.agent_kind!r}")

    @property
    def mask(self) -> ObservationMask:
        return ObservationMask.of_kind(self.observation)


@dataclass
class EpisodeSummary:
    total_n: float
    total_leach: float
    total_uptake: float
    topwt: float
    cumulative_reward: float
    terminal_dap: int
    applications: list  # (dap, applied) for nonzero applications

    def as_dict(self) -> dict:
        return {"total_n": self.total_n, "total_leach": self.total_leach,
                "total_uptake": self.total_uptake, "topwt": self.topwt,
                "cumulative_reward": self.cumulative_reward,
                "terminal_dap": self.terminal_dap,
                "applications": [list(a) for a in self.applications]}


@dataclass
class TrialResult:
    seed: int
    failed: bool = False
    error: str = ""
    curve: list = field(default_factory=list)  # CURVE_COLUMNS rows
    convergence_episode: int | None = None
    summary: EpisodeSummary | None = None


@dataclass
class RunReport:
    config_digest: str
    agent_kind: str
    scenario_name: str
    trials: list[TrialResult] = field(default_factory=list)
    baselines: dict = field(default_factory=dict)  # amount -> EpisodeSummary
    elapsed_s: float = 0.0

    def successful(self) -> list[TrialResult]:
        return [t for t in self.trials if not t.failed]

    def mean_variance_curves(self) -> list[tuple]:
        """Rows (episode, mean_reward, var_reward, mean_N, mean_leach,
        mean_topwt) across successful trials."""
        good = self.successful()
        if not good:
            return []
        n_eps = min(len(t.curve) for t in good)
        rows = []
        for e in range(n_eps):
            rewards = [t.curve[e][2] for t in good]
            rows.append((
                e,
                float(np.mean(rewards)),
                float(np.var(rewards)),
                float(np.mean([t.curve[e][3] for t in good])),
                float(np.mean([t.curve[e][4] for t in good])),
                float(np.mean([t.curve[e][5] for t in good])),
            ))
        return rows


# ---------------------------------------------------------------------------
# Episode execution
# ---------------------------------------------------------------------------

def run_episode(env: NitrogenEnv, policy, mask: ObservationMask,
                seed: int = 0) -> tuple[EpisodeSummary, list[dict]]:
    """Roll out one episode under ``policy(state, normalized_obs) -> kg``."""
    state = env.reset(seed=seed)
    obs = normalize_observation(observe(state, mask), mask)
    total = 0.0
    applications = []
    while not env.done:
        amount = policy(state, obs)
        result = env.step(amount)
        total += result.reward
        state = result.next_state
        obs = normalize_observation(observe(state, mask), mask)
        rec = env.records[-1]
        if rec.action_applied > 0:
            applications.append((rec.dap, rec.action_applied))
    summary = EpisodeSummary(
        total_n=state.cumsumfert, total_leach=state.cleach,
        total_uptake=state.wtnup, topwt=state.topwt,
        cumulative_reward=total, terminal_dap=state.dap,
        applications=applications)
    return summary, [r.as_dict() for r in env.records]


def verify_reward_identity(records: list[dict], reward_cfg: RewardConfig,
                           tol: float = 1e-9) -> float:
    """Recompute every day's reward from the logged actions and fluxes.

    Returns the maximum absolute discrepancy; raises if it exceeds ``tol``.
    Used by reports as an internal consistency check.
    """
    worst = 0.0
    for i, rec in enumerate(records):
        st = rec["state"]
        again = daily_reward(
            a_t=rec["action_applied"], tleachd=st["tleachd"],
            cumsumfert_incl_today=st["cumsumfert"],
            is_harvest=i == len(records) - 1,
            y=st["topwt"], cfg=reward_cfg)
        worst = max(worst, abs(again.total - rec["reward"]))
    if worst > tol:
        raise AssertionError(f"reward identity violated by {worst}")
    return worst


# ---------------------------------------------------------------------------
# Policies
# ---------------------------------------------------------------------------

def baseline_policy(amount: float):
    pol = VStagePolicy(float(amount))

    def call(state, obs):
        return pol(state)
    call.reset = pol.reset  # type: ignore[attr-defined]
    return call


def greedy_policy_from_agent(agent, agent_kind: str):
    if agent_kind == "dqn":
        def call(state, obs):
            return DISCRETE_ACTIONS_KG[agent.greedy_action(obs)]
    else:
        def call(state, obs):
            return discretize_action(agent.mean_action(obs))
    return call


def load_checkpoint(path) -> tuple:
    """Load an agent checkpoint; returns (policy, metadata dict)."""
    with open(path) as fh:
        data = json.load(fh)
    kind = data["agent"]["kind"]
    agent = (DqnAgent if kind == "dqn" else SacAgent).from_dict(data["agent"])
    meta = {k: v for k, v in data.items() if k != "agent"}
    return greedy_policy_from_agent(agent, kind), meta


# ---------------------------------------------------------------------------
# Training
# ---------------------------------------------------------------------------

def _make_agent(config: ExperimentConfig, obs_dim: int, seed: int):
    if config.agent_kind == "dqn":
        return DqnAgent(obs_dim, config.hyper, seed=seed)
    return SacAgent(obs_dim, config.hyper, seed=seed)


def train_trial(config: ExperimentConfig, seed: int) -> tuple[TrialResult, object]:
    """Train one seed; returns the trial record and the trained agent."""
    mask = config.mask
    env = NitrogenEnv(config.scenario)
    obs_dim = mask.size(env.n_layers)
    agent = _make_agent(config, obs_dim, seed)
    trial = TrialResult(seed=seed)
    is_dqn = config.agent_kind == "dqn"

    try:
        for ep in range(config.hyper.episodes):
            epsilon = agent.begin_episode(ep) if is_dqn else 0.0
            state = env.reset(seed=ep)
            obs = normalize_observation(observe(state, mask), mask)
            total = 0.0
            while not env.done:
                if is_dqn:
                    idx = agent.act(obs)
                    raw = DISCRETE_ACTIONS_KG[idx]
                    stored, amount = idx, raw
                else:
                    raw = agent.act(obs)
                    stored, amount = raw, discretize_action(raw)
                result = env.step(amount)
                nobs = normalize_observation(observe(result.next_state, mask),
                                             mask)
                agent.observe(obs, stored, result.reward, nobs, result.done)
                obs = nobs
                total += result.reward
            last = env.state
            if not np.isfinite(total):
                raise FloatingPointError(f"non-finite return at episode {ep}")
            trial.curve.append((ep, epsilon, total, last.cumsumfert,
                                last.cleach, last.topwt))
    except FloatingPointError as exc:
        trial.failed = True
        trial.error = str(exc)
        return trial, agent

    trial.convergence_episode = convergence_episode(
        [row[2] for row in trial.curve])
    summary, _ = run_episode(env, greedy_policy_from_agent(agent, config.agent_kind),
                             mask, seed=0)
    trial.summary = summary
    return trial, agent


def convergence_episode(rewards, window: int = 50, rel_tol: float = 0.01):
    """First episode whose trailing-window mean is within 1% of the final
    trailing mean. This is a reporting metric of this harness, not a quantity
    defined by the training algorithms."""
    if len(rewards) < window:
        return None
    series = np.asarray(rewards, dtype=float)
    trail = np.convolve(series, np.ones(window) / window, mode="valid")
    final = trail[-1]
    denom = max(abs(final), 1e-9)
    for i, value in enumerate(trail):
        if abs(value - final) <= rel_tol * denom:
            return i + window - 1
    return len(rewards) - 1


def sweep_baselines(scenario: ScenarioConfig, grid, mask: ObservationMask
                    ) -> dict[float, EpisodeSummary]:
    env = NitrogenEnv(scenario)
    out = {}
    for amount in grid:
        summary, _ = run_episode(env, baseline_policy(amount), mask, seed=0)
        out[float(amount)] = summary
    return out


def run_training(config: ExperimentConfig) -> RunReport:
    """Train all seeds, sweep baselines, and write the report directory."""
    t0 = time.time()
    report = RunReport(config_digest=config_digest(config),
                       agent_kind=config.agent_kind,
                       scenario_name=config.scenario.name)
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    episodes_log = []
    for seed in config.seeds:
        trial, agent = train_trial(config, seed)
        report.trials.append(trial)
        _write_csv(out / f"trial_{seed}_curve.csv", CURVE_COLUMNS, trial.curve)
        if not trial.failed:
            _write_checkpoint(out / f"trial_{seed}_checkpoint.json", config,
                              agent, seed)
            env = NitrogenEnv(config.scenario)
            _, records = run_episode(
                env, greedy_policy_from_agent(agent, config.agent_kind),
                config.mask, seed=0)
            verify_reward_identity(records, config.scenario.reward)
            episodes_log.append({"method": f"{config.agent_kind}_seed{seed}",
                                 "records": records})

    report.baselines = sweep_baselines(config.scenario, config.baseline_grid,
                                       config.mask)
    report.elapsed_s = time.time() - t0
    emit_report(report, out, episodes_log=episodes_log, config=config)
    return report


def _write_checkpoint(path, config: ExperimentConfig, agent, seed: int):
    data = {"agent": agent.to_dict(), "scenario": config.scenario.name,
            "observation": config.observation, "seed": seed,
            "episodes": config.hyper.episodes,
            "config_digest": config_digest(config)}
    with open(path, "w") as fh:
        json.dump(data, fh)


# ---------------------------------------------------------------------------
# Evaluation entry point
# ---------------------------------------------------------------------------

def evaluate_policy(policy, scenario: ScenarioConfig, mask: ObservationMask,
                    n_episodes: int = 1, base_seed: int = 0
                    ) -> tuple[EpisodeSummary, list[EpisodeSummary]]:
    """Greedy evaluation; with fixed-trace weather one episode suffices.

    Returns (mean summary, per-episode summaries).
    """
    env = NitrogenEnv(scenario)
    per_episode = []
    for k in range(n_episodes):
        if hasattr(policy, "reset"):
            policy.reset()
        summary, records = run_episode(env, policy, mask, seed=base_seed + k)
        verify_reward_identity(records, scenario.reward)
        per_episode.append(summary)
    mean = EpisodeSummary(
        total_n=float(np.mean([s.total_n for s in per_episode])),
        total_leach=float(np.mean([s.total_leach for s in per_episode])),
        total_uptake=float(np.mean([s.total_uptake for s in per_episode])),
        topwt=float(np.mean([s.topwt for s in per_episode])),
        cumulative_reward=float(np.mean([s.cumulative_reward
                                         for s in per_episode])),
        terminal_dap=per_episode[-1].terminal_dap,
        applications=per_episode[-1].applications)
    return mean, per_episode


# ---------------------------------------------------------------------------
# Ablations
# ---------------------------------------------------------------------------

def run_ablation(config: ExperimentConfig, axis: str) -> dict:
    """Train paired conditions with identical seeds and report % deltas.

    axis="observation": full vs partial state vector.
    axis="frequency":   daily actions vs one permitted day in ten.
    Deltas are (variant - reference) / reference * 100, averaged over seeds,
    for final-policy cumulative reward and top weight.
    """
    from dataclasses import replace as dc_replace

    if axis == "observation":
        ref = dc_replace(config, observation="full",
                         out_dir=Path(config.out_dir) / "full")
        var = dc_replace(config, observation="partial",
                         out_dir=Path(config.out_dir) / "partial")
        labels = ("full", "partial")
    elif axis == "frequency":
        ref = dc_replace(config,
                         scenario=dc_replace(config.scenario, action_frequency=1),
                         out_dir=Path(config.out_dir) / "every_day")
        var = dc_replace(config,
                         scenario=dc_replace(config.scenario, action_frequency=10),
                         out_dir=Path(config.out_dir) / "every_10_days")
        labels = ("every_day", "every_10_days")
    else:
        raise ConfigError(f"unknown ablation axis {axis!r}")

    ref_report = run_training(ref)
    var_report = run_training(var)

    def finals(report):
        good = report.successful()
        rewards = [t.summary.cumulative_reward for t in good if t.summary]
        topwts = [t.summary.topwt for t in good if t.summary]
        return float(np.mean(rewards)), float(np.mean(topwts))

    ref_reward, ref_topwt = finals(ref_report)
    var_reward, var_topwt = finals(var_report)
    result = {
        "axis": axis,
        "conditions": {labels[0]: {"reward": ref_reward, "topwt": ref_topwt},
                       labels[1]: {"reward": var_reward, "topwt": var_topwt}},
        "reward_delta_pct": _pct_delta(var_reward, ref_reward),
        "topwt_delta_pct": _pct_delta(var_topwt, ref_topwt),
        "seeds": list(config.seeds),
    }
    out = Path(config.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _write_csv(out / "ablation.csv",
               ("axis", "condition", "reward", "topwt", "reward_delta_pct",
                "topwt_delta_pct"),
               [(axis, labels[0], ref_reward, ref_topwt, 0.0, 0.0),
                (axis, labels[1], var_reward, var_topwt,
                 result["reward_delta_pct"], result["topwt_delta_pct"])])
    with open(out / "ablation.json", "w") as fh:
        json.dump(result, fh, indent=2, sort_keys=True)
    return result


def _pct_delta(value: float, reference: float) -> float:
    if reference == 0.0:
        return 0.0 if value == 0.0 else float("inf")
    return (value - reference) / abs(reference) * 100.0


# ---------------------------------------------------------------------------
# Report emission
# ---------------------------------------------------------------------------

def config_digest(config: ExperimentConfig) -> str:
    blob = repr((config.scenario, config.agent_kind, config.hyper,
                 config.seeds, config.observation,
                 config.baseline_grid)).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _fmt(value) -> str:
    return repr(float(value)) if isinstance(value, (float, np.floating)) \
        else str(value)


def _write_csv(path, columns, rows):
    lines = [",".join(columns)]
    lines += [",".join(_fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")


def emit_report(report: RunReport, out_dir, episodes_log=None,
                config: ExperimentConfig | None = None,
                formats=("csv", "jsonl")) -> list[Path]:
    """Write curves.csv, tables.csv, episodes.jsonl, and manifest.json."""
    if not report.trials:
        raise ConfigError("cannot emit a report with no trials")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []

    if "csv" in formats:
        curves = report.mean_variance_curves()
        path = out / "curves.csv"
        _write_csv(path, ("episode", "mean_reward", "var_reward",
                          "mean_total_N", "mean_total_leach", "mean_topwt"),
                   curves)
        written.append(path)

        rows = []
        for amount in sorted(report.baselines):
            s = report.baselines[amount]
            rows.append((f"baseline_{int(amount)}", s.total_n, s.total_leach,
                         s.total_uptake, s.topwt, s.cumulative_reward))
        for trial in report.successful():
            if trial.summary is None:
                continue
            s = trial.summary
            rows.append((f"{report.agent_kind}_seed{trial.seed}", s.total_n,
                         s.total_leach, s.total_uptake, s.topwt,
                         s.cumulative_reward))
        path = out / "tables.csv"
        _write_csv(path, TABLE_COLUMNS, rows)
        written.append(path)

    if "jsonl" in formats and episodes_log is not None:
        path = out / "episodes.jsonl"
        with open(path, "w") as fh:
            for entry in episodes_log:
                for rec in entry["records"]:
                    fh.write(json.dumps({"method": entry["method"], **rec},
                                        sort_keys=True) + "\n")
        written.append(path)

    manifest = {
        "config_digest": report.config_digest,
        "agent_kind": report.agent_kind,
        "scenario": report.scenario_name,
        "seeds": [t.seed for t in report.trials],
        "trials": [{"seed": t.seed, "failed": t.failed, "error": t.error,
                    "convergence_episode": t.convergence_episode,
                    "summary": t.summary.as_dict() if t.summary else None}
                   for t in report.trials],
        "baselines": {str(int(a)): s.as_dict()
                      for a, s in sorted(report.baselines.items())},
        "elapsed_s": report.elapsed_s,
        "observation": config.observation if config else None,
        "episodes": config.hyper.episodes if config else None,
    }
    path = out / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
    written.append(path)
    return written


def reaggregate(run_dir) -> list[Path]:
    """Rebuild curves.csv and tables.csv from stored per-trial files."""
    run_dir = Path(run_dir)
    manifest_path = run_dir / "manifest.json"
    if not manifest_path.is_file():
        raise ConfigError(f"no manifest.json under {run_dir}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)

    report = RunReport(config_digest=manifest["config_digest"],
                       agent_kind=manifest["agent_kind"],
                       scenario_name=manifest["scenario"])
    for entry in manifest["trials"]:
        trial = TrialResult(seed=entry["seed"], failed=entry["failed"],
                            error=entry.get("error", ""),
                            convergence_episode=entry.get("convergence_episode"))
        if entry.get("summary"):
            s = entry["summary"]
            trial.summary = EpisodeSummary(
                total_n=s["total_n"], total_leach=s["total_leach"],
                total_uptake=s["total_uptake"], topwt=s["topwt"],
                cumulative_reward=s["cumulative_reward"],
                terminal_dap=s["terminal_dap"],
                applications=[tuple(a) for a in s["applications"]])
        curve_path = run_dir / f"trial_{trial.seed}_curve.csv"
        if curve_path.is_file():
            rows = curve_path.read_text().strip().split("\n")[1:]
            trial.curve = [tuple(float(v) for v in row.split(","))
                           for row in rows]
        report.trials.append(trial)
    for amount, s in manifest.get("baselines", {}).items():
        report.baselines[float(amount)] = EpisodeSummary(
            total_n=s["total_n"], total_leach=s["total_leach"],
            total_uptake=s["total_uptake"], topwt=s["topwt"],
            cumulative_reward=s["cumulative_reward"],
            terminal_dap=s["terminal_dap"],
            applications=[tuple(a) for a in s["applications"]])
    report.elapsed_s = manifest.get("elapsed_s", 0.0)
    return emit_report(report, run_dir, episodes_log=None, config=None)
