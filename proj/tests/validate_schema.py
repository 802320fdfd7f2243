"""Run the CLI and validate every report it writes against the shipped schemas.

usage: validate_schema.py <capillary> <schemas dir> <specs dir> <work dir>
"""

import copy
import json
import pathlib
import shutil
import subprocess
import sys

import jsonschema


def load(path):
    with open(path) as f:
        return json.load(f)


def run(*args):
    done = subprocess.run(args, capture_output=True, text=True)
    if done.returncode != 0:
        sys.exit(f"{' '.join(map(str, args))} exited {done.returncode}\n{done.stdout}\n{done.stderr}")


def validator(path):
    schema = load(path)
    jsonschema.Draft202012Validator.check_schema(schema)
    return jsonschema.Draft202012Validator(schema)


def main():
    cli, schemas, specs, work = map(pathlib.Path, sys.argv[1:5])
    shutil.rmtree(work, ignore_errors=True)
    work.mkdir(parents=True)
    report_schema = validator(schemas / "run_report.schema.json")
    ladder_schema = validator(schemas / "ladder.schema.json")

    run(cli, "run", "--spec", specs / "rigidity.json", "--out", work / "run")
    reports = sorted((work / "run").glob("*/report.json"))
    if not reports:
        sys.exit("no reports written")
    for path in reports:
        report_schema.validate(load(path))

    exact = load(specs / "rigidity.json")
    for e in exact["experiments"]:
        e["initial"] = {"type": "exact_cap", "faces": 600}
        e["ladder"] = {"levels": 2, "finest_faces": 2500}
    (work / "exact.json").write_text(json.dumps(exact))
    run(cli, "ladder", "--spec", work / "exact.json", "--out", work / "ladder")
    ladders = sorted((work / "ladder").glob("*/ladder.json"))
    if len(ladders) != len(exact["experiments"]):
        sys.exit("missing ladder reports")
    for path in ladders:
        ladder_schema.validate(load(path))

    first = load(specs / "rigidity.json")["experiments"][0]
    mesh = work / "run" / first["name"] / "final.off"
    spec = work / "single.json"
    spec.write_text(json.dumps(first))
    run(cli, "check-mesh", mesh, "--spec", spec, "--out", work / "check")
    report_schema.validate(load(work / "check" / "report.json"))

    broken = copy.deepcopy(load(reports[0]))
    del broken["schema_version"]
    if report_schema.is_valid(broken):
        sys.exit("schema accepts a report without schema_version")

    print(f"validated {len(reports)} run reports, {len(ladders)} ladders and one check-mesh report")


if __name__ == "__main__":
    main()
