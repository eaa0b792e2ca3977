"""Command-line front end for the full evolve / validate / interpret flow.

Configuration comes from a flat ``key = value`` text file; any recognized
key may be overridden by a CLI flag.  All randomness in a run derives from
the single ``seed`` key through named substreams, so identical configs
replay byte-for-byte.

Exit codes: 0 success, 2 configuration error, 3 data or I/O error,
4 simulation capacity error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import __version__, evolution, interpret, svm
from .datasets import (Dataset, apply_scaler, export_csv, fit_scaler,
                       load_csv, make_blobs, make_moons, split)
from .errors import CapacityError, ConfigError, DataError
from .genome import (WEIGHT_SCHEMES, circuit_from_dict, circuit_to_dict,
                     decode_genome)
from .rng import stream_rngs

DATASET_KINDS = ("moons", "blobs", "csv")
KERNEL_MODES = ("real", "squared")


@dataclass
class RunConfig:
    """Every tunable of a run, mirroring the config-file keys one to one."""

    dataset: str = "moons"
    n: int = 150
    noise: float = 0.2
    classes: int = 5
    features: int = 5
    spread: float = 0.1
    csv_path: str | None = None
    label_column: str | None = None
    train_fraction: float = 0.7
    scale: bool = True
    qubits: int = 6
    layers: int = 6
    C: float = 1.0
    tol: float = 1e-3
    kernel: str = "real"
    weights: str = "coarse"
    population: int = 100
    offspring: int = 15
    generations: int = 5000
    p_cross: float = 0.3
    p_mut: float = 0.7
    p_ind: float = 0.2
    objective: str = "weights_control"
    target_accuracy: float | None = 1.0
    patience: int = 200
    seed: int = 0
    out: str = "run_output"
    threads: int = 1
    validation_csv: str | None = None
    validation_n: int = 500
    grid_resolution: int = 100

    def validate(self) -> None:
        if self.dataset not in DATASET_KINDS:
            raise ConfigError(f"dataset must be one of {DATASET_KINDS}")
        if self.dataset == "csv":
            if not self.csv_path or not self.label_column:
                raise ConfigError("csv datasets need csv_path and label_column")
        elif self.n < 2:
            raise ConfigError("generated datasets need n >= 2")
        if self.dataset == "blobs":
            if self.classes < 2 or self.features < 1:
                raise ConfigError("blobs need classes >= 2 and features >= 1")
            if self.spread <= 0:
                raise ConfigError("spread must be positive")
        if not 0.0 < self.train_fraction < 1.0:
            raise ConfigError("train_fraction must lie strictly in (0, 1)")
        if self.kernel not in KERNEL_MODES:
            raise ConfigError(f"kernel must be one of {KERNEL_MODES}")
        if self.weights not in WEIGHT_SCHEMES:
            raise ConfigError(
                f"weights must be one of {tuple(WEIGHT_SCHEMES)}")
        if self.validation_n < 2:
            raise ConfigError("validation_n must be >= 2")
        if self.grid_resolution < 1:
            raise ConfigError("grid_resolution must be >= 1")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        self.to_evolution_config().validate()

    def to_evolution_config(self) -> evolution.EvolutionConfig:
        return evolution.EvolutionConfig(
            num_qubits=self.qubits, max_layers=self.layers,
            population_size=self.population, offspring_size=self.offspring,
            generations=self.generations, p_crossover=self.p_cross,
            p_mutation=self.p_mut, p_bitflip=self.p_ind, C=self.C,
            tol=self.tol, squared=self.kernel == "squared",
            weight_scheme=self.weights, objective=self.objective,
            target_accuracy=self.target_accuracy,
            patience=self.patience, seed=self.seed, n_jobs=self.threads,
        )


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}
_OPTIONAL_FLOAT_KEYS = {"target_accuracy"}
_OPTIONAL_STR_KEYS = {"csv_path", "label_column", "validation_csv"}


def _coerce(key: str, raw: str):
    value = raw.strip()
    if key in _OPTIONAL_FLOAT_KEYS:
        return None if value.lower() == "none" else float(value)
    if key in _OPTIONAL_STR_KEYS:
        return None if value.lower() == "none" else value
    kind = _FIELD_TYPES[key]
    try:
        if kind == "int":
            return int(value)
        if kind == "float":
            return float(value)
        if kind == "bool":
            if value.lower() in ("true", "1", "yes", "on"):
                return True
            if value.lower() in ("false", "0", "no", "off"):
                return False
            raise ValueError(f"not a boolean: {value!r}")
        return value
    except ValueError as exc:
        raise ConfigError(f"config key {key!r}: {exc}") from exc


def load_config_file(path) -> dict:
    """Parse a flat ``key = value`` file, ignoring blanks and # comments."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, raw = (part.strip() for part in body.split("=", 1))
        if key not in _FIELD_TYPES:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        values[key] = _coerce(key, raw)
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if args.config is not None:
        values.update(load_config_file(args.config))
    for key in _FIELD_TYPES:
        override = getattr(args, key, None)
        if override is not None:
            values[key] = override
    config = RunConfig(**values)
    config.validate()
    return config


def _build_dataset(config: RunConfig, rng) -> Dataset:
    if config.dataset == "moons":
        return make_moons(config.n, noise=config.noise, seed=rng)
    if config.dataset == "blobs":
        return make_blobs(config.n, centers=config.classes,
                          n_features=config.features, spread=config.spread,
                          seed=rng)
    return load_csv(config.csv_path, config.label_column)


def _prepare_split(config: RunConfig, rngs) -> tuple[Dataset, Dataset]:
    dataset = _build_dataset(config, rngs["data"])
    train, test = split(dataset, config.train_fraction, rngs["split"])
    if config.scale:
        scaler = fit_scaler(train)
        train = apply_scaler(scaler, train)
        test = apply_scaler(scaler, test)
    return train, test


def _write_json(payload, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(payload, handle, indent=2, sort_keys=True)
        handle.write("\n")


def _write_manifest(out_dir: Path, command: str, config: RunConfig,
                    results: dict) -> None:
    _write_json({
        "command": command,
        "config": dataclasses.asdict(config),
        "versions": {
            "genqsvm": __version__,
            "numpy": np.__version__,
            "python": sys.version.split()[0],
        },
        "results": results,
    }, out_dir / "manifest.json")


def write_history_csv(history, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("generation,best_accuracy,best_sm,front_size,hypervolume\n")
        for s in history:
            handle.write(f"{s.generation},{s.best_accuracy!r},{s.best_sm!r},"
                         f"{s.front_size},{s.hypervolume!r}\n")


def _front_to_json(front, weight_scheme) -> list[dict]:
    entries = []
    for ind in sorted(front, key=lambda i: (-i.objectives.accuracy,
                                            i.objectives.weights_control,
                                            i.genome.key())):
        entries.append({
            "genome": ind.genome.to_dict(),
            "circuit": circuit_to_dict(
                decode_genome(ind.genome, weight_scheme=weight_scheme)),
            "objectives": {
                "accuracy": ind.objectives.accuracy,
                "weights_control": ind.objectives.weights_control,
                "size_metric": ind.objectives.size_metric,
            },
        })
    return entries


def _prepare_out_dir(config: RunConfig) -> Path:
    out_dir = Path(config.out)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        probe = out_dir / ".write_probe"
        probe.write_text("")
        probe.unlink()
    except OSError as exc:
        raise DataError(f"output directory {out_dir} is not writable: {exc}") from exc
    return out_dir


def cmd_evolve(config: RunConfig) -> None:
    out_dir = _prepare_out_dir(config)
    rngs = stream_rngs(config.seed)
    train, test = _prepare_split(config, rngs)
    front, history = evolution.run(config.to_evolution_config(), train, test)
    best = evolution.best_individual(front)

    write_history_csv(history, out_dir / "history.csv")
    _write_json(_front_to_json(front, config.weights),
                out_dir / "pareto_front.json")
    _write_json(circuit_to_dict(
        decode_genome(best.genome, weight_scheme=config.weights)),
        out_dir / "best_circuit.json")
    _write_manifest(out_dir, "evolve", config, {
        "generations_run": history[-1].generation,
        "best_accuracy": best.objectives.accuracy,
        "best_size_metric": best.objectives.size_metric,
        "best_weights_control": best.objectives.weights_control,
        "front_size": len(front),
    })
    print(f"evolve: best accuracy {best.objectives.accuracy:.4f}, "
          f"size metric {best.objectives.size_metric:.4f}, "
          f"artifacts in {out_dir}")


def _load_circuit(path):
    try:
        with open(path, encoding="utf-8") as handle:
            return circuit_from_dict(json.load(handle))
    except OSError as exc:
        raise DataError(f"cannot read circuit file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: invalid JSON: {exc}") from exc


def _validation_dataset(config: RunConfig, rngs) -> Dataset:
    if config.validation_csv is not None:
        return load_csv(config.validation_csv, config.label_column or "label")
    if config.dataset == "moons":
        return make_moons(config.validation_n, noise=config.noise,
                          seed=rngs["validation"])
    if config.dataset == "blobs":
        return make_blobs(config.validation_n, centers=config.classes,
                          n_features=config.features, spread=config.spread,
                          seed=rngs["validation"])
    raise ConfigError("csv datasets need validation_csv for validation")


def _remap_labels(target: Dataset, reference: Dataset) -> np.ndarray:
    """Express ``target`` labels with ``reference`` class ids (by name)."""
    mapping = {str(name): idx for idx, name in enumerate(reference.class_names)}
    remapped = []
    for label in target.labels:
        name = str(target.class_names[label])
        if name not in mapping:
            raise DataError(f"validation label {name!r} never appears in "
                            "the training data")
        remapped.append(mapping[name])
    return np.asarray(remapped, dtype=int)


def cmd_validate(config: RunConfig, circuit_path) -> None:
    out_dir = _prepare_out_dir(config)
    circuit = _load_circuit(circuit_path)
    rngs = stream_rngs(config.seed)
    dataset = _build_dataset(config, rngs["data"])
    if circuit.num_features != dataset.n_features:
        raise DataError(
            f"circuit expects {circuit.num_features} features, dataset has "
            f"{dataset.n_features}"
        )
    train, _ = split(dataset, config.train_fraction, rngs["split"])
    validation = _validation_dataset(config, rngs)
    if validation.n_features != train.n_features:
        raise DataError(
            f"circuit expects {circuit.num_features} features, validation "
            f"data has {validation.n_features}"
        )
    val_labels = _remap_labels(validation, train)
    if config.scale:
        scaler = fit_scaler(train)
        train = apply_scaler(scaler, train)
        validation = apply_scaler(scaler, validation)

    squared = config.kernel == "squared"
    model = svm.fit(circuit, train.features, train.labels, C=config.C,
                    tol=config.tol, squared=squared)
    predicted = svm.predict(model, circuit, train.features,
                            validation.features, squared=squared)
    acc = svm.accuracy(predicted, val_labels)
    class_ids = list(range(len(train.class_names)))
    counts = svm.confusion(predicted, val_labels, class_ids)

    names = [str(n) for n in train.class_names]
    with open(out_dir / "confusion.csv", "w", encoding="utf-8") as handle:
        handle.write("true_class," + ",".join(names) + "\n")
        for name, row in zip(names, counts):
            handle.write(name + "," + ",".join(str(v) for v in row) + "\n")
    with open(out_dir / "per_class.csv", "w", encoding="utf-8") as handle:
        handle.write("class,support,correct,precision,recall\n")
        for k, name in enumerate(names):
            support = int(counts[k].sum())
            correct = int(counts[k, k])
            predicted_k = int(counts[:, k].sum())
            precision = correct / predicted_k if predicted_k else 0.0
            recall = correct / support if support else 0.0
            handle.write(f"{name},{support},{correct},{precision!r},"
                         f"{recall!r}\n")
    with open(out_dir / "predictions.csv", "w", encoding="utf-8") as handle:
        cols = [f"x{k}" for k in range(validation.n_features)]
        handle.write(",".join(cols) + ",true_label,predicted_label\n")
        for row, true, pred in zip(validation.features, val_labels, predicted):
            cells = [repr(float(v)) for v in row]
            handle.write(",".join(cells) + f",{names[true]},{names[pred]}\n")
    _write_json({
        "accuracy": acc,
        "correct": int(np.trace(counts)),
        "total": int(counts.sum()),
    }, out_dir / "metrics.json")
    _write_json({
        "C": config.C,
        "tol": config.tol,
        "kernel": config.kernel,
        "pairs": [{
            "classes": [names[a], names[b]],
            "n_support": int(m.support_indices.shape[0]),
            "bias": m.bias,
        } for (a, b), m in sorted(model.models.items())],
    }, out_dir / "model_summary.json")
    _write_manifest(out_dir, "validate", config, {
        "accuracy": acc,
        "validation_points": int(counts.sum()),
    })
    print(f"validate: accuracy {acc:.4f} on {int(counts.sum())} points, "
          f"artifacts in {out_dir}")


def cmd_interpret(config: RunConfig, circuit_path) -> None:
    out_dir = _prepare_out_dir(config)
    circuit = _load_circuit(circuit_path)
    rngs = stream_rngs(config.seed)
    train, test = _prepare_split(config, rngs)
    if circuit.num_features != train.n_features:
        raise DataError(
            f"circuit expects {circuit.num_features} features, dataset has "
            f"{train.n_features}"
        )
    grid_spec = None
    grids_skipped = train.n_features != 2
    if not grids_skipped:
        lo = train.features.min(axis=0)
        hi = train.features.max(axis=0)
        margin = 0.1 * (hi - lo)
        grid_spec = interpret.GridSpec(
            x_range=(float(lo[0] - margin[0]), float(hi[0] + margin[0])),
            y_range=(float(lo[1] - margin[1]), float(hi[1] + margin[1])),
            resolution=config.grid_resolution,
        )
    squared = config.kernel == "squared"
    decomposition, full, reports = interpret.per_cluster_report(
        circuit, train, test, C=config.C, tol=config.tol, squared=squared,
        grid_spec=grid_spec)
    check = interpret.factor_kernel_check(
        circuit, decomposition, test.features[: min(16, test.n_samples)],
        squared=squared)

    def report_payload(report):
        return {
            "qubits": list(report.qubits),
            "accuracy": report.accuracy,
            "is_baseline": report.is_baseline,
            "circuit": circuit_to_dict(report.circuit),
        }

    _write_json(report_payload(full), out_dir / "full.json")
    if full.grid is not None:
        _write_grid_csv(full.grid, grid_spec, out_dir / "grid_full.csv")
    for k, report in enumerate(reports):
        _write_json(report_payload(report), out_dir / f"cluster_{k}.json")
        if report.grid is not None:
            _write_grid_csv(report.grid, grid_spec,
                            out_dir / f"grid_cluster_{k}.csv")
    notes = []
    if grids_skipped:
        notes.append("decision grids skipped: dataset is not 2-dimensional")
        print("interpret: " + notes[0])
    _write_manifest(out_dir, "interpret", config, {
        "clusters": [list(c) for c in decomposition.clusters],
        "full_accuracy": full.accuracy,
        "cluster_accuracies": [r.accuracy for r in reports],
        "factor_kernel_max_error": check,
        "notes": notes,
    })
    print(f"interpret: {len(reports)} cluster(s), full accuracy "
          f"{full.accuracy:.4f}, artifacts in {out_dir}")


def _write_grid_csv(grid, grid_spec, path) -> None:
    xs = interpret._grid_axis(grid_spec.x_range, grid_spec.resolution)
    ys = interpret._grid_axis(grid_spec.y_range, grid_spec.resolution)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("x,y,predicted_class\n")
        for ix, x in enumerate(xs):
            for iy, y in enumerate(ys):
                handle.write(f"{float(x)!r},{float(y)!r},{grid[ix, iy]}\n")


def cmd_gen_data(config: RunConfig) -> None:
    if config.dataset == "csv":
        raise ConfigError("gen-data needs a generator dataset, not csv")
    out_path = Path(config.out)
    rngs = stream_rngs(config.seed)
    dataset = _build_dataset(config, rngs["data"])
    try:
        if out_path.parent != Path(""):
            out_path.parent.mkdir(parents=True, exist_ok=True)
        export_csv(dataset, out_path)
    except OSError as exc:
        raise DataError(f"cannot write {out_path}: {exc}") from exc
    _write_json({
        "command": "gen-data",
        "config": dataclasses.asdict(config),
        "rows": dataset.n_samples,
        "versions": {"genqsvm": __version__, "numpy": np.__version__},
    }, out_path.with_name(out_path.name + ".manifest.json"))
    print(f"gen-data: wrote {dataset.n_samples} rows to {out_path}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="genqsvm",
        description="Evolve, validate, and interpret quantum feature-map "
                    "kernels for SVM classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="flat key = value configuration file")
        p.add_argument("--seed", type=int, help="master random seed")
        p.add_argument("--out", help="output directory (file path for gen-data)")
        p.add_argument("--threads", type=int, help="evaluation worker threads")

    p_evolve = sub.add_parser("evolve", help="run the evolutionary search")
    add_common(p_evolve)
    p_evolve.add_argument("--generations", type=int)

    p_validate = sub.add_parser("validate",
                                help="score a circuit on held-out data")
    add_common(p_validate)
    p_validate.add_argument("--circuit", required=True,
                            help="circuit JSON produced by evolve")
    p_validate.add_argument("--validation-csv", dest="validation_csv")
    p_validate.add_argument("--validation-n", dest="validation_n", type=int)

    p_interpret = sub.add_parser("interpret",
                                 help="per-cluster decomposition report")
    add_common(p_interpret)
    p_interpret.add_argument("--circuit", required=True)
    p_interpret.add_argument("--grid-resolution", dest="grid_resolution",
                             type=int)

    p_gen = sub.add_parser("gen-data", help="materialize a synthetic dataset")
    add_common(p_gen)
    p_gen.add_argument("--n", type=int)
    p_gen.add_argument("--noise", type=float)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        config = build_config(args)
        if args.command == "evolve":
            cmd_evolve(config)
        elif args.command == "validate":
            cmd_validate(config, args.circuit)
        elif args.command == "interpret":
            cmd_interpret(config, args.circuit)
        else:
            cmd_gen_data(config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except CapacityError as exc:
        print(f"capacity error: {exc}", file=sys.stderr)
        return 4
    return 0


if __name__ == "__main__":
    sys.exit(main())
