import logging
import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from exact_stream import ConfigurationError, DimensionError, InputError, ContractError, NotReady
from exact_stream.sketch_core import SignSketch, MemoryLedger, MERSENNE_31, derive_seed, sign_matrix, sketch_rows_update, memory_words
from exact_stream.f2_improving import spawn_threshold

LOG = logging.getLogger(__name__)

REGRESSION = 'regression'
SUBSPACE = 'subspace'
MATMUL = 'matmul'
MODES = (REGRESSION, SUBSPACE, MATMUL)
DEFAULT_CONSTANTS = {REGRESSION: 2.0, SUBSPACE: 8.0, MATMUL: 8.0}
FAILURE_SPLIT = 2

@dataclass(frozen=True)
class SketchSchedule:
    mode: str = REGRESSION
    epsilon0: float = 0.5
    delta: float = 0.1
    d: int = 1
    d_prime: int = 1
    alpha: float = 1.0
    C: float = None
    n0: int = 64
    fixed_precision: bool = False
    seed: int = 0
    prime_modulus: int = MERSENNE_31

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigurationError('mode must be one of {0}'.format(', '.join(MODES)))
        if not 0 < self.epsilon0 <= 0.5 or not 0 < self.delta <= 0.5:
            raise ConfigurationError('epsilon0 and delta must lie in (0, 1/2]')
        if not 0 < self.alpha <= 1:
            raise ConfigurationError('alpha must lie in (0, 1]')
        if self.d < 1 or self.d_prime < 1 or self.n0 < 1:
            raise ConfigurationError('d, d_prime and n0 must be positive')
        if self.C is None:
            object.__setattr__(self,'C',DEFAULT_CONSTANTS[self.mode])

    def precision(self,i):
        return self.epsilon0 if self.fixed_precision else self.epsilon0 / max(1,i)

    def failure(self,i):
        return self.delta / (FAILURE_SPLIT * max(1,i)**2)

    def block_size(self,i):
        return spawn_threshold(i,self.n0)

def block_rows(schedule,i):
    if i < 1:
        raise ContractError('block rows are defined for i >= 1')
    eps = schedule.precision(i)
    if schedule.mode == REGRESSION:
        rows = schedule.C * schedule.d / eps * math.log(1 / schedule.failure(i))
    elif schedule.mode == SUBSPACE:
        rows = schedule.C * schedule.d / eps**2 * math.log(1 / schedule.delta)
    else:
        exponent = 2.0 if schedule.fixed_precision else 2.0 * schedule.alpha
        rows = schedule.C / eps**exponent * math.log(schedule.d * schedule.d_prime / schedule.failure(i))
    return max(1,int(math.ceil(rows)))

@dataclass
class RegressionSolution:
    coefficients: np.ndarray
    sketched_residual: float
    rank: int
    rank_deficient: bool = False
    ready = True

class BlockDiagonalSketchState:
    def __init__(self,schedule,width=None,with_target=None,guard_c=1e3,guard_exponent=1.0,ledger=None):
        self.schedule = schedule
        self.width = schedule.d if width is None else width
        self.with_target = schedule.mode == REGRESSION if with_target is None else with_target
        self.guard_c = guard_c
        self.guard_exponent = guard_exponent
        self.ledger = MemoryLedger() if ledger is None else ledger
        self.blocks = []
        self.block_row_counts = []
        self.rows_in_block = 0
        self.rows_total = 0
        self.magnitude_violations = 0
        self._open_block()

    @property
    def current_block(self):
        return len(self.blocks) - 1

    @property
    def block_image_rows(self):
        return [b.rows for b in self.blocks]

    def _open_block(self):
        i = len(self.blocks)
        rows = block_rows(self.schedule,max(1,i))
        sketch = SignSketch(rows,derive_seed(self.schedule.seed,i),width=self.width + int(self.with_target),
            prime_modulus=self.schedule.prime_modulus,ledger=self.ledger)
        self.blocks.append(sketch)
        self.block_row_counts.append(0)
        self.rows_in_block = 0
        LOG.debug('opened block %d with %d sketch rows',i,rows)

    def _guard(self,rows,first_n):
        n = first_n + np.arange(1,len(rows) + 1)
        limit = self.guard_c * n.astype(np.float64) ** self.guard_exponent
        over = np.abs(rows).max(axis=1) > limit
        count = int(np.count_nonzero(over))
        if count:
            if self.magnitude_violations == 0:
                LOG.warning('entries exceed c*n^Delta with c=%g, Delta=%g',self.guard_c,self.guard_exponent)
            self.magnitude_violations += count

    def ingest_row(self,a_row,b_val=None):
        a_row = np.asarray(a_row,dtype=np.float64).reshape(1,-1)
        b = None if b_val is None else np.array([b_val],dtype=np.float64)
        return self.ingest_rows(a_row,b)

    def ingest_rows(self,A,b=None):
        A = np.asarray(A,dtype=np.float64)
        if A.ndim == 1:
            A = A.reshape(1,-1)
        if A.shape[1] != self.width:
            raise DimensionError('rows of width {0} on a state of width {1}'.format(A.shape[1],self.width))
        if self.with_target:
            if b is None:
                raise ContractError('regression state needs target values')
            b = np.asarray(b,dtype=np.float64).reshape(-1,1)
            if len(b) != len(A):
                raise DimensionError('{0} rows but {1} targets'.format(len(A),len(b)))
            A = np.hstack([A,b])
        elif b is not None:
            raise ContractError('state was built without a target column')
        if not np.all(np.isfinite(A)):
            raise InputError('non-finite entry')
        if len(A):
            self._guard(A,self.rows_total)
        position = 0
        while position < len(A):
            i = self.current_block
            take = min(len(A) - position,self.schedule.block_size(i) - self.rows_in_block)
            sketch_rows_update(self.blocks[i],self.rows_in_block,A[position:position + take])
            self.rows_in_block += take
            self.block_row_counts[i] += take
            self.rows_total += take
            position += take
            if self.rows_in_block == self.schedule.block_size(i):
                LOG.debug('sealed block %d after %d rows',i,self.rows_total)
                self._open_block()
        return self

    def _image(self):
        return np.vstack([b.image for b in self.blocks])

    @property
    def SA(self):
        return self._image()[:,:self.width]

    @property
    def Sb(self):
        if not self.with_target:
            raise ContractError('state was built without a target column')
        return self._image()[:,self.width]

    @property
    def memory_words(self):
        return sum(memory_words(b) for b in self.blocks)

    def __repr__(self):
        return 'BlockDiagonalSketchState(mode={0}, n={1}, blocks={2})'.format(self.schedule.mode,self.rows_total,len(self.blocks))

def current_precision(state):
    return state.schedule.precision(max(1,state.current_block))

def solve_regression(state):
    if not state.with_target:
        raise ContractError('state was built without a target column')
    if state.rows_total == 0:
        return NotReady(reason='no rows ingested')
    SA = state.SA
    Sb = state.Sb
    if SA.shape[0] < state.width:
        return NotReady(reason='{0} sketch rows for {1} columns'.format(SA.shape[0],state.width))
    x, _, rank, _ = scipy.linalg.lstsq(SA,Sb,lapack_driver='gelsy')
    deficient = rank < state.width
    if deficient:
        LOG.warning('sketched design has rank %d < %d, returning the minimum-norm solution',rank,state.width)
    residual = float(np.linalg.norm(SA @ x - Sb))
    return RegressionSolution(x,residual,int(rank),deficient)

def _same_sketch(state_a,state_b):
    return (state_a.schedule == state_b.schedule and state_a.rows_total == state_b.rows_total
        and state_a.block_image_rows == state_b.block_image_rows)

def sketched_matmul(state_a,state_b):
    if not _same_sketch(state_a,state_b):
        raise ContractError('matrix product needs the same sketch on both sides')
    return state_a.SA.T @ state_b.SA

def dense_sketch_matrix(state):
    """Explicit diag(S_1, ..., S_l) restricted to the rows ingested so far."""
    dense = np.zeros((sum(b.rows for b in state.blocks),state.rows_total))
    top = left = 0
    for sketch, count in zip(state.blocks,state.block_row_counts):
        if count:
            dense[top:top + sketch.rows,left:left + count] = sign_matrix(sketch,np.arange(count))
        top += sketch.rows
        left += count
    return dense

def subspace_distortion(sketched,A_full):
    """Worst relative change of |Ax|^2 under the sketch over the row space of A."""
    A = np.asarray(A_full,dtype=np.float64)
    if A.ndim == 1:
        A = A.reshape(-1,1)
    SA = sketched.SA if isinstance(sketched,BlockDiagonalSketchState) else np.asarray(sketched,dtype=np.float64)
    if SA.ndim == 1:
        SA = SA.reshape(-1,1)
    _, s, Vt = scipy.linalg.svd(A,full_matrices=False)
    if s.size == 0 or s[0] == 0:
        return 0.0
    rank = int(np.count_nonzero(s > s[0] * max(A.shape) * np.finfo(float).eps))
    SU = SA @ Vt[:rank].T / s[:rank]
    sv = scipy.linalg.svdvals(SU)
    # fewer sketch rows than rank annihilates a direction
    worst = 1.0 if len(sv) < rank else 0.0
    return max(worst,float(np.max(np.abs(sv**2 - 1.0))))

def min_singular_value_sq(A_full):
    A = np.asarray(A_full,dtype=np.float64)
    if A.ndim == 1:
        A = A.reshape(-1,1)
    if A.shape[1] > A.shape[0]:
        return 0.0
    return float(scipy.linalg.svdvals(A)[-1] ** 2)
