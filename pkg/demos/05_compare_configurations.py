"""
Comparing weighting strategies
==============================

Runs a few configurations over several seeds and prints the summary
table.  Each run takes a few seconds; the full grid over ten seeds
takes several minutes, so this demo uses a subset.
"""

from dataclasses import replace

from dmf.harness import RunConfig, compare, summary_table

base = RunConfig()
configs = [
    base,                                          # variance + CB-Dice
    replace(base, strategy="mad"),
    replace(base, strategy="bayesian"),
    replace(base, aux="none"),
    replace(base, aux="none", fixed_weights=True),  # equal weights throughout
]

rows = compare(configs, seeds=range(3))
print(summary_table(rows))
