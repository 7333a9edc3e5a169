"""
This module provides some utils functions shared by the decomposition
builders, the sweeps and the command line driver: seeding, table printing
and the json/csv writers every output goes through.
"""

import json
import random
import logging

import numpy as np
import pandas as pd
from prettytable import PrettyTable

logger = logging.getLogger(__name__)


def set_seed(seed):
  np.random.seed(seed)
  random.seed(seed)


def make_rng(seed):
  return np.random.default_rng(seed)


def print_table(rows, columns, title=None):
  """Prints a list of dict rows as a table.

  Args:
      rows (list): one dict per row.
      columns (list): keys to show, in order.
      title (str): optional table title.
  """
  table = PrettyTable(columns)
  if title is not None:
    table.title = title
  for row in rows:
    table.add_row([row.get(c, '') for c in columns])
  print(table)
  return table


def print_storage(report):
  table = PrettyTable(["Representation", "n", "d", "Size", "Nonzeros"])
  table.add_row([report.kind, report.n, report.d, report.size_label, report.nnz])
  print(table)

  nnz = report.nnz
  if nnz > 1e9:
    print(f'nnz = {float(nnz) / 1e9:.2f} G ({nnz})')
  elif nnz > 1e6:
    print(f'nnz = {float(nnz) / 1e6:.2f} M ({nnz})')
  elif nnz > 1e3:
    print(f'nnz = {float(nnz) / 1e3:.2f} K ({nnz})')


def write_json(obj, filename):
  """Writes obj as indented json with sorted keys (byte-stable output)."""
  with open(filename, "w") as f:
    json.dump(obj, f, indent=4, sort_keys=True)
    f.write("\n")
  logger.info(f"Wrote {filename}")


def write_csv(frame, filename, schema, provenance):
  """Writes a DataFrame preceded by '#' comment lines carrying the schema tag
  and the provenance block. Read back with pd.read_csv(..., comment='#')."""
  with open(filename, "w", newline="") as f:
    f.write(f"# schema: {schema}\n")
    f.write(f"# provenance: {json.dumps(provenance, sort_keys=True)}\n")
    frame.to_csv(f, index=False, lineterminator="\n")
  logger.info(f"Wrote {filename} ({len(frame)} rows)")


def read_csv(filename):
  return pd.read_csv(filename, comment="#")
