import logging
import math

import numpy as np

from exact_stream import ConfigurationError, RangeError, ContractError, NotReady, Estimate
from exact_stream.sketch_core import SignSketch, MemoryLedger, MERSENNE_31, DEFAULT_C, derive_seed, sketch_update_many, sketch_norm_sq, memory_words

LOG = logging.getLogger(__name__)

TWO_SKETCH = 'two_sketch'
PARALLEL = 'parallel'
POLICIES = (TWO_SKETCH, PARALLEL)

WORD_LIMIT = 2**63
# union bound constant: sum of delta/(2 i^2) over i >= 1 stays below delta
FAILURE_SPLIT = 2
DEFAULT_C_MEM = 400.0

def spawn_threshold(i,n0):
    if i < 0 or n0 < 1:
        raise ConfigurationError('spawn_threshold needs i >= 0 and n0 >= 1')
    value = (1 << i) * n0
    if value >= WORD_LIMIT:
        raise ConfigurationError('schedule step {0} overflows the word size'.format(i))
    return value

def step_precision(epsilon0,step):
    return epsilon0 / max(1,step)

def step_failure(delta,step):
    return delta / (FAILURE_SPLIT * max(1,step)**2)

def step_rows(epsilon0,delta,step,C=DEFAULT_C):
    precision = step_precision(epsilon0,step)
    return max(1,int(math.ceil(C / precision**2 * math.log(2 / step_failure(delta,step)))))

def discard_bound(n1,n):
    return 3.0 * n1 / math.sqrt(n)

def memory_bound(n,delta,policy=PARALLEL,C_mem=DEFAULT_C_MEM):
    # log^2 n log(1/delta) words per sketch lineage, times log n lineages in parallel
    power = 3 if policy == PARALLEL else 2
    return C_mem * math.log2(max(2,n))**power * math.log(1 / delta)

class ManagedSketch:
    def __init__(self,sketch,start_offset,precision,spawn_step):
        self.sketch = sketch
        self.start_offset = start_offset
        self.precision = precision
        self.spawn_step = spawn_step

    def __repr__(self):
        return 'ManagedSketch(step={0}, offset={1}, precision={2:.4f}, rows={3})'.format(
            self.spawn_step,self.start_offset,self.precision,self.sketch.rows)

def error_bound(ms,n):
    if n <= 0:
        raise ContractError('error bound needs a nonempty stream')
    if ms.start_offset * ms.start_offset > n:
        return math.inf
    return ms.precision + discard_bound(ms.start_offset,n)

class F2Estimator:
    def __init__(self,universe_bound,policy=PARALLEL,base_block=64,epsilon0=0.5,delta=0.1,seed=0,C=DEFAULT_C,prime_modulus=MERSENNE_31):
        if policy not in POLICIES:
            raise ConfigurationError('policy must be one of {0}'.format(', '.join(POLICIES)))
        if universe_bound < 1 or universe_bound >= prime_modulus:
            raise ConfigurationError('universe bound {0} must lie in [1, {1})'.format(universe_bound,prime_modulus))
        if base_block < 1:
            raise ConfigurationError('base block must be positive')
        if not 0 < epsilon0 <= 0.5 or not 0 < delta <= 0.5:
            raise ConfigurationError('epsilon0 and delta must lie in (0, 1/2]')
        self.policy = policy
        self.universe_bound = universe_bound
        self.base_block = base_block
        self.epsilon0 = epsilon0
        self.delta = delta
        self.seed = seed
        self.C = C
        self.prime_modulus = prime_modulus
        self.ledger = MemoryLedger()
        self.active = []
        self.items_total = 0
        self._spawn(0)
        # steps 0 and 1 share epsilon0: a two-sketch candidate at step 1 could never overtake
        self._next_step = 1 if policy == PARALLEL else 2

    def _spawn(self,step):
        rows = step_rows(self.epsilon0,self.delta,step,self.C)
        sketch = SignSketch(rows,derive_seed(self.seed,step),prime_modulus=self.prime_modulus,ledger=self.ledger)
        ms = ManagedSketch(sketch,self.items_total,step_precision(self.epsilon0,step),step)
        self.active.append(ms)
        LOG.debug('spawned %r at n=%d',ms,self.items_total)
        return ms

    def _next_event(self):
        if self.policy == PARALLEL:
            return self.base_block * ((1 << self._next_step) - 1)
        if len(self.active) == 1:
            return max(self.base_block,self.items_total)
        return self._promotion_point()

    def _promotion_point(self):
        reporter, candidate = self.active
        gap = reporter.precision - candidate.precision
        n = max(1,candidate.start_offset**2)
        if gap > 0:
            lead = 3.0 * (candidate.start_offset - reporter.start_offset) / gap
            n = max(n,int(lead * lead))
        while error_bound(candidate,n) >= error_bound(reporter,n):
            n += 1
        return n

    def _handle_events(self):
        self.prune()
        if self.policy == PARALLEL:
            while self.items_total >= self._next_event():
                self._spawn(self._next_step)
                self._next_step += 1
        elif len(self.active) == 1 and self.items_total >= self.base_block:
            self._spawn(self._next_step)
            self._next_step += 1

    def insert(self,item):
        return self.insert_many([item])

    def insert_many(self,items):
        items = np.asarray(items,dtype=np.int64).ravel()
        if items.size and (items.min() < 1 or items.max() > self.universe_bound):
            raise RangeError('item outside [1, {0}]'.format(self.universe_bound))
        position = 0
        while position < items.size:
            self._handle_events()
            take = min(items.size - position,max(1,self._next_event() - self.items_total))
            chunk = items[position:position + take]
            values, counts = np.unique(chunk,return_counts=True)
            for ms in self.active:
                sketch_update_many(ms.sketch,values,counts)
            self.items_total += take
            position += take
        self._handle_events()
        return self

    def prune(self):
        if self.items_total == 0:
            return self
        bounds = [error_bound(ms,self.items_total) for ms in self.active]
        keep = []
        for i, ms in enumerate(self.active):
            if any(bounds[j] < bounds[i] for j in range(i + 1,len(self.active))):
                ms.sketch.release()
                LOG.debug('pruned %r at n=%d',ms,self.items_total)
            else:
                keep.append(ms)
        self.active = keep
        return self

    def best(self):
        if self.items_total == 0:
            return None, math.inf
        chosen = None
        best_bound = math.inf
        for ms in self.active:
            bound = error_bound(ms,self.items_total)
            # ties go to the younger sketch
            if chosen is None or bound <= best_bound:
                chosen, best_bound = ms, bound
        return chosen, best_bound

    def estimate(self):
        ms, bound = self.best()
        if ms is None:
            return NotReady(math.inf,'empty stream')
        if math.isinf(bound):
            return NotReady(bound,'no sketch covers the stream yet')
        return Estimate(sketch_norm_sq(ms.sketch),bound)

    @property
    def memory_words(self):
        return sum(memory_words(ms.sketch) for ms in self.active)

    def __repr__(self):
        return 'F2Estimator(policy={0}, n={1}, active={2})'.format(self.policy,self.items_total,len(self.active))
