import json
import logging
import math
import os
import time
from dataclasses import dataclass, asdict

import numpy as np
from joblib import Parallel, delayed

from exact_stream.f2_improving import F2Estimator, memory_bound
from exact_stream.coreset_clustering import CoresetSummary, solve, clustering_cost
from exact_stream.linalg_sketch import (SUBSPACE, SketchSchedule, BlockDiagonalSketchState, solve_regression, sketched_matmul,
    subspace_distortion)
from exact_stream.oracles import ORACLE_CAP, ExactCounter, exact_least_squares, exact_matmul
from exact_stream.generators import generate_stream
from exact_stream.sources import parse_input, write_stream

LOG = logging.getLogger(__name__)

@dataclass
class TrajectoryRecord:
    n: int
    value: float = None
    bound: float = None
    oracle: float = None
    rel_err: float = None
    mem_words: int = 0
    elapsed_ns: int = None

    def __post_init__(self):
        if self.oracle is not None and self.value is not None and self.oracle > 0:
            self.rel_err = abs(self.value - self.oracle) / self.oracle
        else:
            self.rel_err = None

    def to_json(self):
        return json.dumps(asdict(self),allow_nan=False)

def checkpoints(n0,n_max,schedule='pow2'):
    factor = 8 if schedule == 'pow8' else 2
    points = []
    n = n0
    while n <= n_max:
        points.append(n)
        n *= factor
    if not points or points[-1] != n_max:
        points.append(n_max)
    return points

def _finite(x):
    return None if x is None or not math.isfinite(x) else float(x)

class F2Task:
    def __init__(self,config,stream):
        self.config = config
        self.estimator = F2Estimator(config.universe,policy=config.policy,base_block=config.n0,epsilon0=config.epsilon0,
            delta=config.delta,seed=config.seed,C=config.C,prime_modulus=config.prime_modulus)
        self.counter = ExactCounter()
        self.stream = stream
        self.over_budget = False

    def ingest(self,start,stop):
        chunk = self.stream.data[start:stop]
        self.estimator.insert_many(chunk)
        self.counter.insert_many(chunk)

    def measure(self,n,with_oracle):
        budget = memory_bound(n,self.config.delta,self.config.policy,self.config.C_mem)
        if self.estimator.ledger.words_peak > budget and not self.over_budget:
            self.over_budget = True
            LOG.warning('sketch memory %d words exceeds the budget of %d at n=%d',self.estimator.ledger.words_peak,budget,n)
        result = self.estimator.estimate()
        oracle = float(self.counter.f2) if with_oracle else None
        if not result.ready:
            return None, None, oracle
        return result.value, _finite(result.bound), oracle

    def mem_words(self):
        return self.estimator.ledger.words_live

class ClusterTask:
    def __init__(self,config,stream):
        self.config = config
        self.stream = stream
        self.summary = CoresetSummary(config.k,stream.data.shape[1],objective=config.objective,epsilon0=config.epsilon0,
            delta=config.delta,C_g=config.C_g,seed=config.seed)

    def ingest(self,start,stop):
        self.summary.stream_insert_many(self.stream.data[start:stop])

    def measure(self,n,with_oracle):
        prefix = self.stream.data[:n]
        result = solve(self.summary,self.config.k,self.config.restarts,self.config.seed,self.config.objective)
        oracle = None
        if with_oracle:
            best = solve(prefix,self.config.k,self.config.oracle_restarts,self.config.seed,self.config.objective)
            oracle = clustering_cost(prefix,best.centers,self.config.objective)
        if not result.ready:
            return None, None, oracle
        # priced on every point so far, the unsealed buffer included
        return clustering_cost(prefix,result.centers,self.config.objective), None, oracle

    def mem_words(self):
        return self.summary.ledger.words_live

class RegressTask:
    def __init__(self,config,stream):
        self.config = config
        self.stream = stream
        schedule = SketchSchedule(mode=config.mode,epsilon0=config.epsilon0,delta=config.delta,d=stream.data.shape[1],
            alpha=config.alpha,C=config.C_linalg,n0=config.n0,fixed_precision=config.fixed_precision,seed=config.seed,
            prime_modulus=config.prime_modulus)
        self.state = BlockDiagonalSketchState(schedule,with_target=True,guard_c=config.guard_c,guard_exponent=config.guard_exponent)

    def ingest(self,start,stop):
        self.state.ingest_rows(self.stream.data[start:stop],self.stream.targets[start:stop])

    def measure(self,n,with_oracle):
        A = self.stream.data[:n]
        b = self.stream.targets[:n]
        if self.config.mode == SUBSPACE:
            # the exact embedding has no distortion
            return subspace_distortion(self.state,A), None, 0.0 if with_oracle else None
        solution = solve_regression(self.state)
        oracle = exact_least_squares(A,b)[1] if with_oracle else None
        if not solution.ready:
            return None, None, oracle
        return float(np.linalg.norm(A @ solution.coefficients - b)), None, oracle

    def mem_words(self):
        return self.state.ledger.words_live

class MatmulTask:
    def __init__(self,config,stream):
        self.config = config
        self.stream = stream
        self.d = stream.meta.get('d') or config.d
        self.d_prime = stream.meta.get('d_prime') or config.d_prime
        schedule = SketchSchedule(mode='matmul',epsilon0=config.epsilon0,delta=config.delta,d=self.d,d_prime=self.d_prime,
            alpha=config.alpha,C=config.C_linalg,n0=config.n0,fixed_precision=config.fixed_precision,seed=config.seed,
            prime_modulus=config.prime_modulus)
        guard = dict(with_target=False,guard_c=config.guard_c,guard_exponent=config.guard_exponent)
        self.left = BlockDiagonalSketchState(schedule,width=self.d,**guard)
        self.right = BlockDiagonalSketchState(schedule,width=self.d_prime,**guard)

    def ingest(self,start,stop):
        rows = self.stream.data[start:stop]
        self.left.ingest_rows(rows[:,:self.d])
        self.right.ingest_rows(rows[:,self.d:])

    def measure(self,n,with_oracle):
        rows = self.stream.data[:n]
        A, B = rows[:,:self.d], rows[:,self.d:]
        scale = np.linalg.norm(A) * np.linalg.norm(B)
        if scale == 0:
            return 0.0, None, 0.0 if with_oracle else None
        # Frobenius error relative to |A|_F |B|_F; the exact product has none
        error = np.linalg.norm(sketched_matmul(self.left,self.right) - np.einsum('ij,ik->jk',A,B))
        return float(error / scale), None, 0.0 if with_oracle else None

    def mem_words(self):
        return self.left.ledger.words_live + self.right.ledger.words_live

class OracleTask:
    """Exact values only; the oracle mode names the problem."""

    def __init__(self,config,stream):
        self.config = config
        self.stream = stream
        self.counter = ExactCounter()

    def ingest(self,start,stop):
        if self.config.mode == 'f2':
            self.counter.insert_many(self.stream.data[start:stop])

    def measure(self,n,with_oracle):
        if not with_oracle:
            return None, None, None
        mode = self.config.mode
        if mode == 'f2':
            value = float(self.counter.f2)
        elif mode == 'cluster':
            best = solve(self.stream.data[:n],self.config.k,self.config.oracle_restarts,self.config.seed,self.config.objective)
            value = best.cost
        elif mode == 'regress':
            value = exact_least_squares(self.stream.data[:n],self.stream.targets[:n])[1]
        else:
            rows = self.stream.data[:n]
            d = self.stream.meta.get('d') or self.config.d
            value = float(np.linalg.norm(exact_matmul(rows[:,:d],rows[:,d:])))
        return value, None, value

    def mem_words(self):
        return 0

TASKS = {'f2': F2Task, 'cluster': ClusterTask, 'regress': RegressTask, 'matmul': MatmulTask, 'oracle': OracleTask}

DEFAULT_GENERATORS = {
    'f2': 'uniform-int(N=16)',
    'cluster': 'gaussian-mixture(k={k},d={d})',
    'regress': 'regression-rows(d={d})',
    'matmul': 'matrix-pair(d={d},d_prime={d_prime})',
}

def problem(config):
    return config.mode if config.task == 'oracle' else config.task

def load_stream(config):
    task = problem(config)
    if config.input:
        stream = parse_input(config.input,task,config.d if task != 'f2' else None,config.d_prime)
        if len(stream) > config.n:
            stream.data = stream.data[:config.n]
            if stream.targets is not None:
                stream.targets = stream.targets[:config.n]
        return stream
    spec = config.gen or DEFAULT_GENERATORS.get(task,DEFAULT_GENERATORS['f2']).format(k=config.k,d=config.d,d_prime=config.d_prime)
    return generate_stream(spec,config.seed,config.n)

def oracle_limit(config):
    return min(config.oracle_cap,ORACLE_CAP)

def run_experiment(config):
    stream = load_stream(config)
    if config.task == 'gen':
        return []
    if len(stream) == 0:
        return []
    task = TASKS[config.task](config,stream)
    records = []
    elapsed = 0
    position = 0
    warned = False
    cap = oracle_limit(config)
    for n in checkpoints(config.n0,len(stream),config.checkpoints):
        started = time.perf_counter_ns()
        task.ingest(position,n)
        position = n
        with_oracle = bool(config.oracle) and n <= cap
        if config.oracle and not with_oracle and not warned:
            warned = True
            LOG.warning('oracle cap %d reached, oracle columns omitted from n=%d',cap,n)
        value, bound, oracle = task.measure(n,with_oracle)
        elapsed += time.perf_counter_ns() - started
        records.append(TrajectoryRecord(n,value,bound,oracle,None,task.mem_words(),elapsed if config.timing else None))
        LOG.debug('checkpoint %s',records[-1])
    return records

def write_records(records,f):
    for record in records:
        f.write(record.to_json() + '\n')

def _seed_path(out,seed):
    root, ext = os.path.splitext(out)
    return '{0}.seed{1}{2}'.format(root,seed,ext or '.jsonl')

def peak_words(records):
    return max((r.mem_words for r in records),default=0)

def run_to_file(config,path):
    """Write one run to path and return (path, peak words at any checkpoint)."""
    if config.task == 'gen':
        write_stream(load_stream(config),path)
        return path, 0
    records = run_experiment(config)
    with open(path,'w',encoding='utf-8') as f:
        write_records(records,f)
    return path, peak_words(records)

def run_batch(config,count,n_jobs=-1):
    seeds = [config.seed + i for i in range(count)]
    jobs = (delayed(run_to_file)(config.with_seed(s),_seed_path(config.out,s)) for s in seeds)
    return Parallel(n_jobs=n_jobs)(jobs)
