"""Command line pipeline: generate -> train -> interp / galerkin -> evaluate.

Output directory layout::

    snapshots/   training snapshot sets (snap_###.grom + snapshots.json)
    database/    trained POD database (manifest.json, mean_*, triplet_*)
    truth/       oracle solutions at the query parameters
    interp/      Bi-CITSGM reconstructions (pred_###.grom, calibrated triplets in
                 pred_###/{phi,sigma,psi}.grom, results.json)
    galerkin/    ITSGM/Galerkin reconstructions, same layout
    report/      report.csv, report.json, spectrum.csv
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__, datastore, metrics
from .bicitsgm import mean_relative_error, predict
from .config import RunConfig, apply_override, load_config_document
from .database import build_database, load_databases, save_databases
from .errors import GrassromError, StorageError, ValidationError
from .galerkin import galerkin_predict
from .itsgm import itsgm_interpolate
from .oracle import analytic_field, solve_burgers

log = logging.getLogger("grassrom")

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_IO = 0, 2, 3, 4


class Pipeline:
    def __init__(self, config, out, force=False, jobs=1):
        self.config = config
        self.out = Path(out)
        self.force = force
        self.jobs = max(1, int(jobs))

    # paths
    @property
    def snapshot_dir(self):
        return self.out / "snapshots"

    @property
    def database_dir(self):
        return self.out / "database"

    @property
    def truth_dir(self):
        return self.out / "truth"

    def _map(self, fn, items):
        if self.jobs == 1:
            return [fn(x) for x in items]
        with ThreadPoolExecutor(max_workers=self.jobs) as pool:
            return list(pool.map(fn, items))

    def solve(self, parameter):
        cfg = self.config.oracle_config
        if self.config.oracle == "analytic":
            return analytic_field(cfg, parameter)
        return solve_burgers(cfg, parameter)

    def check_parameters(self, params):
        if self.config.oracle == "burgers":
            for p in params:
                self.config.oracle_config.check_cfl(p)

    # commands
    def generate(self):
        index = self.snapshot_dir / datastore.SNAPSHOT_INDEX_NAME
        if index.exists() and not self.force:
            print(f"snapshots already present in {self.snapshot_dir}; use --force to regenerate")
            return
        params = self.config.training_parameters
        self.check_parameters(params)
        sets = self._map(self.solve, params)
        datastore.write_snapshot_sets(self.snapshot_dir, sets)
        print(f"wrote {len(sets)} snapshot sets to {self.snapshot_dir}")

    def train(self):
        manifest = self.database_dir / datastore.MANIFEST_NAME
        if manifest.exists() and not self.force:
            db = load_databases(self.database_dir)
        else:
            sets = datastore.read_snapshot_sets(self.snapshot_dir)
            db = {"u": build_database(sets, q=self.config.q, ric_threshold=self.config.ric_threshold)}
            save_databases(self.database_dir, db.values(), extra={"oracle": self.config.oracle})
        self.print_spectrum(db.values())
        return db

    def print_spectrum(self, databases, limit=12):
        for db in databases:
            print(f"field {db.field_name}: rank q = {db.rank}")
            for t in db.triplets:
                rows = metrics.spectrum_from_eigenvalues(t.eigenvalues[:], db.field_name, t.parameter)
                cells = " ".join(f"{r['ric']:.6f}" for r in rows[:limit])
                print(f"  param {t.parameter:<10.6g} lambda_1 {t.eigenvalues[0]:.4e}  RIC^1..{limit}: {cells}")

    def spectrum(self):
        dbs = load_databases(self.database_dir).values()
        rows = metrics.spectrum_rows(dbs)
        (self.out / "report").mkdir(parents=True, exist_ok=True)
        metrics.write_spectrum_csv(rows, self.out / "report" / "spectrum.csv")
        self.print_spectrum(dbs)

    def truths(self, params, create=True):
        """Oracle solutions at ``params`` (cached on disk)."""
        index = self.truth_dir / datastore.SNAPSHOT_INDEX_NAME
        have = {}
        if index.exists():
            have = {s.parameter: s for s in datastore.read_snapshot_sets(self.truth_dir)}
        missing = [p for p in params if p not in have]
        if missing and create:
            self.check_parameters(missing)
            for s in self._map(self.solve, missing):
                have[s.parameter] = s
            datastore.write_snapshot_sets(self.truth_dir, [have[p] for p in sorted(have)])
        return {p: have[p] for p in params if p in have}

    def _write_results(self, name, results, triplets=()):
        directory = self.out / name
        directory.mkdir(parents=True, exist_ok=True)
        entries = []
        for i, r in enumerate(results):
            path = f"pred_{i:03d}.grom"
            datastore.write_matrix(directory / path, r.reconstruction)
            if triplets:
                sub = directory / f"pred_{i:03d}"
                sub.mkdir(exist_ok=True)
                datastore.write_matrix(sub / "phi.grom", triplets[i].phi_cal)
                datastore.write_matrix(sub / "sigma.grom", triplets[i].sigma)
                datastore.write_matrix(sub / "psi.grom", triplets[i].psi_cal)
            entries.append({"parameter": r.parameter, "method": r.method, "field": r.field,
                            "wall_time_s": r.wall_time, "path": path})
        with open(directory / "results.json", "w") as fh:
            json.dump({"results": entries}, fh, indent=2)

    def _read_results(self, name):
        directory = self.out / name
        if not (directory / "results.json").exists():
            return []
        with open(directory / "results.json") as fh:
            doc = json.load(fh)
        return [metrics.MethodResult(e["method"], e["parameter"], datastore.read_matrix(directory / e["path"]),
                                     e["wall_time_s"], e["field"]) for e in doc["results"]]

    def _report_errors(self, results):
        if not self.config.truth_on_demand:
            return
        truths = self.truths([r.parameter for r in results])
        for r in results:
            eps = mean_relative_error(truths[r.parameter], r.reconstruction)
            print(f"  {r.method:<16} param {r.parameter:<10.6g} eps {eps:8.4f} %  time {r.wall_time:.4f} s")

    def interp(self):
        db = load_databases(self.database_dir)["u"]
        bic = self.config.bicitsgm
        preds = self._map(lambda p: predict(db, p, bic), self.config.query_parameters)
        results = [metrics.MethodResult("bicitsgm", p.parameter, p.reconstruction, p.wall_time) for p in preds]
        self._write_results("interp", results, preds)
        self._report_errors(results)
        return results

    def galerkin(self):
        if self.config.oracle != "burgers":
            raise ValidationError("the Galerkin baseline is only available for the burgers oracle")
        db = load_databases(self.database_dir)["u"]
        cfg = self.config.oracle_config
        spatial = [(t.parameter, t.phi) for t in db.triplets]

        def run(nu):
            self.config.oracle_config.check_cfl(nu)
            start = time.perf_counter()
            phi = itsgm_interpolate(spatial, nu, self.config.bicitsgm.itsgm_spatial)
            itsgm_time = time.perf_counter() - start
            recon, _, rom_time = galerkin_predict(phi, db.mean, cfg, nu, db.times)
            return metrics.MethodResult("itsgm_galerkin", nu, recon, itsgm_time + rom_time)

        results = self._map(run, self.config.query_parameters)
        self._write_results("galerkin", results)
        self._report_errors(results)
        return results

    def evaluate(self):
        results = self._read_results("interp") + self._read_results("galerkin")
        if not results:
            raise ValidationError("no predictions found; run 'interp' (and 'galerkin') first")
        params = sorted({r.parameter for r in results})
        truths = self.truths(params, create=self.config.truth_on_demand)
        dbs = load_databases(self.database_dir).values()
        report = metrics.build_report(truths, results, dbs)
        metrics.write_report(report, self.out / "report")
        print(metrics.format_table(report))
        return report


def build_parser():
    parser = argparse.ArgumentParser(
        prog="grassrom",
        description="Parametric POD reduced models by bi-calibrated Grassmann interpolation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON run configuration")
    common.add_argument("--out", metavar="DIR", help="output directory (overrides output_dir)")
    common.add_argument("--force", action="store_true", help="recompute existing outputs")
    common.add_argument("--jobs", type=int, default=1, metavar="N", help="parallel queries")
    common.add_argument("--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
                        help="override a config field by dotted path, e.g. bicitsgm.calib_power_spatial=3")
    common.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    helps = {
        "generate": "solve the oracle at the training parameters",
        "train": "build the POD database and print eigenvalue/RIC tables",
        "interp": "predict query parameters with Bi-CITSGM",
        "galerkin": "predict query parameters with ITSGM + Galerkin (burgers only)",
        "evaluate": "write error/timing report",
        "spectrum": "export eigenvalue/RIC spectra",
    }
    for name, text in helps.items():
        sub.add_parser(name, parents=[common], help=text)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        doc = load_config_document(args.config)
        for assignment in args.overrides:
            apply_override(doc, assignment)
        config = RunConfig.from_dict(doc)
        out = args.out or config.output_dir
        pipeline = Pipeline(config, out, force=args.force, jobs=args.jobs)
        getattr(pipeline, args.command)()
    except GrassromError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
