"""Metric files and the command line.

A metric file is JSON holding the component formulas.  The ``chernlab``
command computes, verifies and scans them and prints JSON reports.
"""
import json
import subprocess
import sys
import tempfile
from pathlib import Path

from chernlab.metricfile import emit_zoo

tmp = Path(tempfile.mkdtemp())
path = tmp / "hopf.json"
path.write_text(emit_zoo("hopf", 2).dumps())
print(path.read_text())


def chernlab(*args):
    proc = subprocess.run([sys.executable, "-m", "chernlab.cli", *args], capture_output=True, text=True)
    return proc.returncode, proc.stdout, proc.stderr


code, out, _ = chernlab("compute", "--metric", str(path), "--point", "1+0i,0")
r = json.loads(out)["results"][0]
print("compute: exit", code, " u =", r["u"], " v =", r["v"])

code, out, _ = chernlab("verify", "--metric", str(path), "--suite", "pointwise")
print("verify pointwise: exit", code)

# break one component and verify again
data = json.loads(path.read_text())
data["name"] = "corrupted-hopf"
data["components"][0][0] += " + 0.001*z1*zb1"
bad = tmp / "corrupted.json"
bad.write_text(json.dumps(data))
code, out, err = chernlab("verify", "--metric", str(bad), "--suite", "pointwise")
print("verify corrupted: exit", code, "|", err.strip())

code, out, _ = chernlab("scan", "--zoo", "hopf", "--k", "1", "--alpha", "1", "--beta", "-2", "--seed", "7")
s = json.loads(out)["results"][0]
print("scan:", s["quantity"], s["verdict"], "mean", s["mean"])
