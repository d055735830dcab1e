"""Local-to-global discrete Bayesian network structure learning.

Parent/child sets come from FCBF over pairwise mutual information; they are
merged into a skeleton and oriented either by conditional-independence
tests plus Meek's rules (:func:`f2sl_c`) or by BDeu hill climbing
(:func:`f2sl_s`).
"""

from .dataset import (ContingencyTable, Dataset, NetworkModel, contingency_counts,
                      forward_sample, load_csv, parse_bif, write_bif)
from .evaluation import EvalReport, arrowhead_metrics, evaluate, pc_metrics, shd
from .info import (CITestResult, MiCache, ci_test, conditional_mutual_information,
                   dsep_oracle, entropy, mutual_information)
from .orient_constraint import Pdag, f2sl_c, find_vstructures, meek_rules
from .orient_score import Dag, ScoreCache, f2sl_s, hill_climb, local_bdeu, total_score
from .pcselect import PCSet, fcbf_backward, fcbf_forward, learn_all_pc, learn_pc, mrmr_select
from .skeleton import Skeleton, build_skeleton

__version__ = "0.1.0"
