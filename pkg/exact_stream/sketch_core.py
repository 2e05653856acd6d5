import copy
import logging
import math
from dataclasses import dataclass

import numpy as np

from exact_stream import ConfigurationError, RangeError, InputError, DimensionError, ContractError

LOG = logging.getLogger(__name__)

MERSENNE_31 = 2**31 - 1
# products of two residues must fit a signed 64 bit word
MAX_MODULUS = 2**31 - 1
HASH_WORDS = 5
DEFAULT_C = 8.0

def is_prime(p):
    if p < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if p % q == 0:
            return p == q
    d = p - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    # deterministic Miller-Rabin witnesses for p < 3.3e24
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a,d,p)
        if x == 1 or x == p - 1:
            continue
        for _ in range(s - 1):
            x = x * x % p
            if x == p - 1:
                break
        else:
            return False
    return True

def derive_seed(seed,*keys):
    entropy = [int(seed) & 0xFFFFFFFFFFFFFFFF] + [int(k) for k in keys]
    return int(np.random.SeedSequence(entropy).generate_state(1,dtype=np.uint64)[0])

def _check_modulus(prime_modulus):
    if prime_modulus > MAX_MODULUS:
        raise ConfigurationError('prime modulus {0} exceeds {1}'.format(prime_modulus,MAX_MODULUS))
    if not is_prime(prime_modulus):
        raise ConfigurationError('modulus {0} is not prime'.format(prime_modulus))

@dataclass(frozen=True)
class FourWiseHash:
    prime_modulus: int
    coefficients: tuple
    # None when the coefficients were not drawn by new_four_wise_hash
    seed: int = None

    def sign(self,index):
        return sign_at(self,index)

def new_four_wise_hash(seed,prime_modulus=MERSENNE_31):
    _check_modulus(prime_modulus)
    rng = np.random.default_rng(seed)
    coefficients = tuple(int(c) for c in rng.integers(0,prime_modulus,size=4))
    return FourWiseHash(prime_modulus,coefficients,seed)

def _polynomial(coefficients,indices,p):
    # Horner over (rows, indices); every intermediate stays below 2**62
    c = np.asarray(coefficients,dtype=np.int64).reshape(-1,4)
    x = np.asarray(indices,dtype=np.int64).reshape(1,-1)
    v = np.broadcast_to(c[:,3:4],(c.shape[0],x.shape[1])).copy()
    for j in (2, 1, 0):
        v = (v * x + c[:,j:j+1]) % p
    return v

def _signs(coefficients,indices,p):
    v = _polynomial(coefficients,indices,p)
    return np.where(2 * v < p,1.0,-1.0)

def sign_at(h,index):
    if index < 0 or index >= h.prime_modulus:
        raise RangeError('index {0} outside [0, {1})'.format(index,h.prime_modulus))
    return int(_signs(h.coefficients,[index],h.prime_modulus)[0,0])

def jl_rows(epsilon,delta,C=DEFAULT_C):
    if not 0 < epsilon < 1 or not 0 < delta < 1:
        raise ConfigurationError('epsilon and delta must lie in (0, 1)')
    return max(1,int(math.ceil(C / epsilon**2 * math.log(1 / delta))))

class MemoryLedger:
    def __init__(self):
        self.words_live = 0
        self.words_peak = 0

    def allocate(self,words):
        self.words_live += words
        self.words_peak = max(self.words_peak,self.words_live)

    def release(self,words):
        if words > self.words_live:
            raise ContractError('releasing {0} words with {1} live'.format(words,self.words_live))
        self.words_live -= words

    def __repr__(self):
        return 'MemoryLedger(live={0}, peak={1})'.format(self.words_live,self.words_peak)

class SignSketch:
    """Rescaled random sign projection S = R/sqrt(m) kept as its image.

    width None holds a vector image S·x; an integer width holds S·A for
    a matrix streamed row by row.
    """

    def __init__(self,rows,seed,width=None,prime_modulus=MERSENNE_31,ledger=None):
        if rows < 1:
            raise ConfigurationError('sketch needs at least one row, got {0}'.format(rows))
        if width is not None and width < 1:
            raise ConfigurationError('matrix sketch width must be positive')
        _check_modulus(prime_modulus)
        self.rows = int(rows)
        self.width = width
        self.seed = seed
        self.prime_modulus = prime_modulus
        rng = np.random.default_rng(seed)
        self.coefficients = rng.integers(0,prime_modulus,size=(self.rows,4),dtype=np.int64)
        self.image = np.zeros(self.rows if width is None else (self.rows,width))
        self.items_seen = 0
        self._scale = 1.0 / math.sqrt(self.rows)
        self.ledger = ledger
        if ledger is not None:
            ledger.allocate(memory_words(self))

    @property
    def row_hashes(self):
        return [self.row_hash(r) for r in range(self.rows)]

    def row_hash(self,r):
        return FourWiseHash(self.prime_modulus,tuple(int(c) for c in self.coefficients[r]))

    def release(self):
        if self.ledger is not None:
            self.ledger.release(memory_words(self))
            self.ledger = None

    def __repr__(self):
        return 'SignSketch(rows={0}, width={1}, seed={2})'.format(self.rows,self.width,self.seed)

# caps the temporary sign matrix at about 2**22 entries
def _chunk(sk):
    return max(1,(1 << 22) // sk.rows)

def _check_indices(sk,indices):
    if indices.size and (indices.min() < 0 or indices.max() >= sk.prime_modulus):
        raise RangeError('index outside [0, {0})'.format(sk.prime_modulus))

def sign_matrix(sk,indices):
    indices = np.asarray(indices,dtype=np.int64)
    _check_indices(sk,indices)
    return _signs(sk.coefficients,indices,sk.prime_modulus) * sk._scale

def sketch_update(sk,index,weight=1.0):
    return sketch_update_many(sk,[index],[weight])

def sketch_update_many(sk,indices,weights=None):
    if sk.width is not None:
        raise ContractError('vector update on a matrix sketch')
    indices = np.asarray(indices,dtype=np.int64).ravel()
    weights = np.ones(indices.size) if weights is None else np.asarray(weights,dtype=np.float64).ravel()
    if weights.size != indices.size:
        raise DimensionError('{0} indices but {1} weights'.format(indices.size,weights.size))
    if not np.all(np.isfinite(weights)):
        raise InputError('non-finite weight')
    _check_indices(sk,indices)
    step = _chunk(sk)
    for start in range(0,indices.size,step):
        sk.image += sign_matrix(sk,indices[start:start + step]) @ weights[start:start + step]
    # a whole positive weight w stands for w unit insertions
    whole = weights[(weights >= 1) & (weights == np.floor(weights))]
    sk.items_seen += int(whole.sum())
    return sk

def sketch_row_update(sk,row_index,row):
    row = np.asarray(row,dtype=np.float64)
    if row.ndim != 1:
        raise DimensionError('expected a single row')
    return sketch_rows_update(sk,row_index,row.reshape(1,-1))

def sketch_rows_update(sk,first_row_index,rows):
    if sk.width is None:
        raise ContractError('row update on a vector sketch')
    rows = np.asarray(rows,dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != sk.width:
        raise DimensionError('rows of width {0} on a sketch of width {1}'.format(rows.shape[-1],sk.width))
    if not np.all(np.isfinite(rows)):
        raise InputError('non-finite row entry')
    step = _chunk(sk)
    for start in range(0,rows.shape[0],step):
        block = rows[start:start + step]
        indices = np.arange(first_row_index + start,first_row_index + start + block.shape[0])
        sk.image += sign_matrix(sk,indices) @ block
    sk.items_seen += rows.shape[0]
    return sk

def sketch_norm_sq(sk):
    if sk.width is not None:
        raise ContractError('norm of a matrix image')
    return float(np.dot(sk.image,sk.image))

def memory_words(sk):
    width = 1 if sk.width is None else sk.width
    return sk.rows * width + HASH_WORDS * sk.rows

def snapshot(sk):
    copied = copy.copy(sk)
    copied.image = sk.image.copy()
    copied.ledger = None
    return copied
