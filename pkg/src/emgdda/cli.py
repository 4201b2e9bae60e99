"""Command-line front end: ``emgdda {synth,extract,select,train,evaluate,simulate}``."""
from __future__ import annotations

import argparse
import json
import pickle
import sys
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .classify import PipelineConfig, fit_pipeline, loso_evaluate, render_table, reports_to_json
from .config import RunConfig, load_config
from .dataset import Task, dataset_summary, load_corpus, save_sessions
from .dda import write_trajectory_csv
from .dsp import DwtConfig, NormMode
from .errors import ConfigError, EmgDdaError
from .features import ExtractionConfig, ThresholdConfig, extract_corpus, read_feature_csv, write_feature_csv
from .gamesim import Mode, PlayerModel, SynthEmgConfig, simulate_session, synth_participant
from .selection import MiConfig, mrmr_select, write_selection_csv


def derive_seed(root: int, *path: int) -> int:
    return int(np.random.SeedSequence([root, *path]).generate_state(1)[0])


def extraction_config(cfg: RunConfig) -> ExtractionConfig:
    t = cfg.thresholds
    return ExtractionConfig(
        dwt=DwtConfig(level=cfg.dsp.level) if cfg.dsp.dwt else None,
        norm_mode=NormMode(cfg.dsp.norm_mode),
        thresholds=ThresholdConfig(t.zc, t.ssc, t.wamp, t.myop),
    )


def pipeline_configs(cfg: RunConfig) -> list[PipelineConfig]:
    c = cfg.classifier
    common = dict(
        lda_ridge=c.lda_ridge,
        svm_gamma=c.svm_gamma,
        svm_c=c.svm_c,
        n_select=cfg.selection.k if cfg.selection.enabled else None,
        mi_bins=cfg.selection.bins,
        extraction=extraction_config(cfg),
    )
    out = []
    for name in c.names:
        ks = c.knn_k if name == "knn" else [4]
        out.extend(PipelineConfig(classifier=name, knn_k=int(k), **common) for k in ks)
    return out


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.paths.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.yaml").write_text(cfg.dump(), encoding="utf-8")
    return out


def _labeled_matrix(cfg: RunConfig):
    if cfg.paths.features:
        return read_feature_csv(cfg.paths.features).labeled()
    return extract_corpus(load_corpus(cfg.paths.corpus), extraction_config(cfg)).labeled()


def cmd_synth(cfg: RunConfig) -> dict:
    out = _out_dir(cfg)
    s = cfg.synth
    emg = SynthEmgConfig(noise_sd=s.noise_sd)
    summary = {}
    for p in range(s.participants):
        pid = f"p{p + 1:02d}"
        sessions, draws = synth_participant(
            pid, emg, n_sessions=s.sessions, windows=s.windows, sample_rate_hz=s.sample_rate_hz,
            seed=derive_seed(cfg.seed, p), decimals=s.decimals,
        )
        save_sessions(sessions, out / f"{pid}.jsonl")
        summary.update(dataset_summary(sessions))
    (out / "summary.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    return summary


def cmd_extract(cfg: RunConfig) -> Path:
    fm = extract_corpus(load_corpus(cfg.paths.corpus), extraction_config(cfg))
    out = _out_dir(cfg)
    write_feature_csv(fm, out / "features.csv")
    return out / "features.csv"


def cmd_select(cfg: RunConfig):
    fm = _labeled_matrix(cfg)
    res = mrmr_select(fm.X, fm.labels, cfg.selection.k, MiConfig(bins=cfg.selection.bins), fm.names)
    out = _out_dir(cfg)
    write_selection_csv(res, out / "selection.csv")
    return res


def cmd_train(cfg: RunConfig):
    fm = _labeled_matrix(cfg)
    pc = pipeline_configs(cfg)[0]
    model = fit_pipeline(fm.X, fm.labels, pc, fm.names)
    out = _out_dir(cfg)
    path = Path(cfg.paths.model) if cfg.paths.model else out / "model.pkl"
    with open(path, "wb") as fh:
        pickle.dump(model, fh)
    return path


def cmd_evaluate(cfg: RunConfig) -> dict:
    fm = _labeled_matrix(cfg)
    results = {pc.label: loso_evaluate(fm, pc, workers=cfg.workers) for pc in pipeline_configs(cfg)}
    out = _out_dir(cfg)
    (out / "report.json").write_text(reports_to_json(results), encoding="utf-8")
    table = render_table(results)
    (out / "report.txt").write_text(table, encoding="utf-8")
    print(table, end="")
    return results


def cmd_simulate(cfg: RunConfig) -> dict:
    sim = cfg.simulate
    source = None
    if sim.affect_source == "classifier":
        if not cfg.paths.model:
            raise ConfigError("paths.model: classifier affect source needs a trained model")
        with open(cfg.paths.model, "rb") as fh:
            source = pickle.load(fh)
    out = _out_dir(cfg)
    summary = []
    for i, skill in enumerate(sim.skills):
        for j, start in enumerate(sim.starts):
            seed = derive_seed(cfg.seed, i, j)
            for mode in sim.modes:
                player = PlayerModel(float(skill), error_steepness=sim.steepness, seed=seed)
                res = simulate_session(player, Mode(mode), sim.windows, Task(sim.task), source,
                                       start_difficulty=int(start), sample_rate_hz=sim.sample_rate_hz,
                                       participant_id=f"skill{skill}", session_id=f"start{start}_{mode}")
                stem = f"sim_skill{skill}_start{start}_{mode}"
                save_sessions([res.session], out / f"{stem}.jsonl")
                write_trajectory_csv(res.trajectory_rows(), out / f"{stem}.csv")
                summary.append({
                    "skill": skill, "start": start, "mode": mode, "seed": seed,
                    "difficulties": res.difficulties,
                    "final_difficulty": res.final_difficulty,
                    "time_in_flow_band": res.time_in_band(skill - 1, skill + 1),
                })
    (out / "simulation.json").write_text(json.dumps(summary, indent=2), encoding="utf-8")
    return {"runs": summary}


COMMANDS = {
    "synth": cmd_synth,
    "extract": cmd_extract,
    "select": cmd_select,
    "train": cmd_train,
    "evaluate": cmd_evaluate,
    "simulate": cmd_simulate,
}

# flag dest -> config key
_FLAG_KEYS = {
    "corpus": "paths.corpus", "out": "paths.out", "model": "paths.model", "features": "paths.features",
    "seed": "seed", "workers": "workers",
    "dwt_level": "dsp.level", "norm_mode": "dsp.norm_mode",
    "k": "selection.k", "bins": "selection.bins",
    "classifier": "classifier.names", "knn_k": "classifier.knn_k",
    "svm_gamma": "classifier.svm_gamma", "svm_c": "classifier.svm_c", "lda_ridge": "classifier.lda_ridge",
    "participants": "synth.participants", "sessions": "synth.sessions", "windows": "synth.windows",
    "sample_rate": "synth.sample_rate_hz", "noise_sd": "synth.noise_sd",
    "skills": "simulate.skills", "starts": "simulate.starts", "sim_windows": "simulate.windows",
    "mode": "simulate.modes", "task": "simulate.task", "affect_source": "simulate.affect_source",
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--version", action="version", version=f"emgdda {__version__}")
    common.add_argument("--config", help="YAML run configuration")
    common.add_argument("--dump-config", action="store_true", help="print the effective config and exit")
    common.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                        help="override any config key, e.g. --set dsp.level=3")
    g = common.add_argument_group("paths")
    g.add_argument("--corpus")
    g.add_argument("--out")
    g.add_argument("--model")
    g.add_argument("--features", help="read a feature CSV instead of a corpus")
    g.add_argument("--seed", type=int)
    g.add_argument("--workers", type=int)
    g = common.add_argument_group("pipeline")
    g.add_argument("--no-dwt", action="store_true", help="skip the Haar approximation stage")
    g.add_argument("--dwt-level", type=int)
    g.add_argument("--norm-mode", choices=["subtract_mean", "zscore"])
    g.add_argument("--k", type=int, help="number of mRMR features")
    g.add_argument("--bins", type=int)
    g.add_argument("--no-select", action="store_true", help="use all 112 features")
    g.add_argument("--classifier", help="comma list of knn,lda,svm")
    g.add_argument("--knn-k", help="comma list of k values (sweep)")
    g.add_argument("--svm-gamma", type=float)
    g.add_argument("--svm-c", type=float)
    g.add_argument("--lda-ridge", type=float)
    g = common.add_argument_group("synthesis / simulation")
    g.add_argument("--participants", type=int)
    g.add_argument("--sessions", type=int)
    g.add_argument("--windows", type=int)
    g.add_argument("--sample-rate", type=int)
    g.add_argument("--noise-sd", type=float)
    g.add_argument("--skills")
    g.add_argument("--starts")
    g.add_argument("--sim-windows", type=int)
    g.add_argument("--mode", help="comma list of adaptive,nonadaptive")
    g.add_argument("--task", choices=["WM", "EM"])
    g.add_argument("--affect-source", choices=["ground_truth", "classifier"])

    parser = argparse.ArgumentParser(prog="emgdda", description=__doc__, parents=[])
    parser.add_argument("--version", action="version", version=f"emgdda {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sub.add_parser(name, parents=[common], help=COMMANDS[name].__name__.replace("cmd_", ""))
    return parser


def config_from_args(args) -> RunConfig:
    overrides = {}
    for dest, key in _FLAG_KEYS.items():
        v = getattr(args, dest, None)
        if v is not None:
            overrides[key] = v
    if args.no_dwt:
        overrides["dsp.dwt"] = False
    if args.no_select:
        overrides["selection.enabled"] = False
    for item in args.set:
        if "=" not in item:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        key, value = item.split("=", 1)
        overrides[key.strip()] = yaml.safe_load(value)
    return load_config(args.config, overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = config_from_args(args)
        if args.dump_config:
            print(cfg.dump(), end="")
            return 0
        COMMANDS[args.command](cfg)
    except EmgDdaError as exc:
        print(f"emgdda {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"emgdda {args.command}: IoError: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
