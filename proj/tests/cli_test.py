"""End-to-end checks of the pdpp command line: exit codes, determinism,
output schema and config error reporting."""

import json
import subprocess
import sys
import tempfile
from pathlib import Path

import jsonschema

BIN = Path(sys.argv[1])
ROOT = Path(sys.argv[2])
failures = []


def run(*args):
    return subprocess.run([str(BIN), *map(str, args)], capture_output=True, text=True)


def check(name, cond, detail=""):
    print(("ok   " if cond else "FAIL ") + name + (f"  ({detail})" if detail and not cond else ""))
    if not cond:
        failures.append(name)


with tempfile.TemporaryDirectory() as tmp:
    tmp = Path(tmp)

    def config(name, obj):
        path = tmp / name
        path.write_text(json.dumps(obj))
        return path

    small = config("small.json", {"group_counts": [3], "group_sizes": [3], "trials": 4,
                                  "embed_dim": 8, "methods": ["greedy_map_multi", "divbs", "random", "kdpp"]})

    r = run("--help")
    check("help exits 0", r.returncode == 0, r.returncode)
    r = run()
    check("missing subcommand exits 1", r.returncode == 1, r.returncode)
    r = run("bench", "--no-such-flag")
    check("unknown flag exits 1", r.returncode == 1, r.returncode)
    r = run("bench", "--config", tmp / "missing.json")
    check("missing config exits 1", r.returncode == 1, r.returncode)

    bad = config("bad.json", {"group_counts": [3], "trails": 4})
    r = run("bench", "--config", bad)
    check("unknown bench field exits 1", r.returncode == 1, r.returncode)
    check("unknown bench field is named", "trails" in r.stderr, r.stderr)

    r = run("bench", "--methods", "brute_force", "--trials", "1")
    check("infeasible brute force exits 1", r.returncode == 1, r.returncode)
    check("refusal names the configuration", "k=32" in r.stderr and "w=32" in r.stderr, r.stderr)

    r = run("bench", "--methods", "greedy,random")
    check("unknown method exits 1", r.returncode == 1, r.returncode)
    r = run("bench", "--config", small, "--format", "xml", "--output", tmp / "x")
    check("unknown format exits 1", r.returncode == 1, r.returncode)

    single = config("single.json", {"group_counts": [2], "group_sizes": [2], "trials": 3,
                                    "methods": ["random"]})
    out = tmp / "single.csv"
    r = run("bench", "--config", single, "--output", out)
    lines = out.read_text().splitlines() if out.exists() else []
    check("single random method writes 3 records", r.returncode == 0 and len(lines) == 4, lines)
    check("single method records are transversal with rank 1",
          all(l.endswith(",1,1") for l in lines[1:]), lines)

    a, b, c = tmp / "a.csv", tmp / "b.csv", tmp / "c.csv"
    run("bench", "--config", small, "--seed", 9, "--omit-timing", "--output", a)
    run("bench", "--config", small, "--seed", 9, "--omit-timing", "--output", b)
    run("bench", "--config", small, "--seed", 9, "--omit-timing", "--threads", 3, "--output", c)
    check("identical seeds give identical CSV", a.read_bytes() == b.read_bytes())
    check("thread count does not change CSV", a.read_bytes() == c.read_bytes())
    run("bench", "--config", small, "--seed", 10, "--omit-timing", "--output", b)
    check("different seeds give different CSV", a.read_bytes() != b.read_bytes())

    j1, j2 = tmp / "a.json", tmp / "b.json"
    r = run("bench", "--config", small, "--format", "json", "--omit-timing", "--output", j1)
    run("bench", "--config", small, "--format", "json", "--omit-timing", "--output", j2)
    check("identical seeds give identical JSON", j1.read_bytes() == j2.read_bytes())
    schema = json.loads((ROOT / "schemas" / "bench_output.schema.json").read_text())
    for name, path in [("omitted timing", j1)]:
        try:
            jsonschema.validate(json.loads(path.read_text()), schema)
            check(f"JSON output ({name}) matches schema", True)
        except jsonschema.ValidationError as e:
            check(f"JSON output ({name}) matches schema", False, e.message)
    timed = tmp / "timed.json"
    run("bench", "--config", small, "--format", "json", "--include-kdpp-ranks", "--output", timed)
    try:
        doc = json.loads(timed.read_text())
        jsonschema.validate(doc, schema)
        check("timed JSON output matches schema", True)
        check("kdpp ranked on request", all(rec["rank"] is not None for rec in doc["records"]))
    except (jsonschema.ValidationError, ValueError) as e:
        check("timed JSON output matches schema", False, str(e))

    r = run("verify")
    check("verify exits 0", r.returncode == 0, r.stdout[-300:])
    r = run("verify", "--format", "json")
    check("verify JSON parses", r.returncode == 0 and json.loads(r.stdout)["passed"] is True)
    r = run("verify", "--inject-fault", "asymmetric-kernel")
    check("injected fault exits 2", r.returncode == 2, r.returncode)
    check("injected fault names the assertion", "kernel_symmetric" in r.stdout, r.stdout[-300:])
    r = run("verify", "--inject-fault", "nonsense")
    check("unknown fault exits 1", r.returncode == 1, r.returncode)

    demo = ROOT / "configs" / "decode_demo.json"
    r1 = run("decode", "--config", demo)
    r2 = run("decode", "--config", demo)
    check("decode exits 0", r1.returncode == 0, r1.stderr)
    check("decode report is byte-identical for a fixed seed", r1.stdout == r2.stdout)
    check("decode report lists metrics", "distinct_2=" in r1.stdout and "self_bleu_4=" in r1.stdout)
    r3 = run("decode", "--config", demo, "--seed", 99)
    check("decode seed override changes the run", r3.stdout != r1.stdout)

    r = run("decode", "--config", ROOT / "configs" / "decode_single.json")
    check("single-beam decode refuses diversity metrics",
          r.returncode == 0 and "unavailable" in r.stdout, r.stdout)

    trace = tmp / "trace.json"
    r = run("decode", "--config", demo, "--output", trace)
    try:
        steps = json.loads(trace.read_text())
        check("trace JSON parses", r.returncode == 0 and len(steps["steps"]) == 8)
    except (ValueError, KeyError, FileNotFoundError) as e:
        check("trace JSON parses", False, str(e))

    bad_decode = config("bad_decode.json", {"k": 2, "model": {"type": "toy", "colour": 1}})
    r = run("decode", "--config", bad_decode)
    check("malformed decode config exits 1", r.returncode == 1, r.returncode)
    check("decode error carries the field path", "model.colour" in r.stderr, r.stderr)
    r = run("decode")
    check("decode without config exits 1", r.returncode == 1, r.returncode)

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
