import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from exact_stream import ConfigurationError, InputError, ContractError, NotReady
from exact_stream.sketch_core import MemoryLedger, derive_seed

LOG = logging.getLogger(__name__)

MEANS = 'means'
MEDIAN = 'median'
OBJECTIVES = (MEANS, MEDIAN)

DEFAULT_C_G = 40.0
WEISZFELD_SMOOTHING = 1e-12
FAILURE_SPLIT = 2

@dataclass
class WeightedPoint:
    coordinates: np.ndarray
    weight: float = 1.0

    def __post_init__(self):
        self.coordinates = np.asarray(self.coordinates,dtype=np.float64)
        if not self.weight > 0:
            raise InputError('point weight must be positive, got {0}'.format(self.weight))
        if not np.all(np.isfinite(self.coordinates)):
            raise InputError('non-finite coordinate')

@dataclass
class BlockCoreset:
    coordinates: np.ndarray
    weights: np.ndarray
    block_index: int
    block_size: int
    precision: float
    failure_budget: float

    @property
    def points(self):
        return [WeightedPoint(c,float(w)) for c, w in zip(self.coordinates,self.weights)]

    def __len__(self):
        return len(self.weights)

@dataclass
class ClusteringResult:
    centers: np.ndarray
    cost: float
    min_cluster_size: int
    ready = True

def _check_objective(objective):
    if objective not in OBJECTIVES:
        raise ConfigurationError('objective must be one of {0}'.format(', '.join(OBJECTIVES)))

def _power(objective):
    return 2 if objective == MEANS else 1

def as_arrays(points,weights=None):
    if isinstance(points,CoresetSummary):
        return points.arrays()
    if len(points) and isinstance(points[0],WeightedPoint):
        X = np.array([p.coordinates for p in points],dtype=np.float64)
        w = np.array([p.weight for p in points],dtype=np.float64)
        return X, w
    X = np.asarray(points,dtype=np.float64)
    if X.ndim == 1:
        X = X.reshape(-1,1)
    w = np.ones(len(X)) if weights is None else np.asarray(weights,dtype=np.float64)
    return X, w

def _distances(X,centers,objective):
    centers = np.asarray(centers,dtype=np.float64)
    if centers.size == 0:
        raise ContractError('empty center set')
    if centers.ndim == 1:
        centers = centers.reshape(-1,X.shape[1])
    D = cdist(X,centers,'sqeuclidean' if objective == MEANS else 'euclidean')
    return D

def clustering_cost(points,centers,objective=MEANS,weights=None):
    _check_objective(objective)
    X, w = as_arrays(points,weights)
    D = _distances(X,centers,objective)
    if len(X) == 0:
        return 0.0
    return float(np.dot(w,D.min(axis=1)))

def min_cluster_size(points,centers,weights=None):
    X, w = as_arrays(points,weights)
    D = _distances(X,centers,MEANS)
    labels = np.argmin(D,axis=1)
    sizes = np.bincount(labels,weights=w,minlength=D.shape[1])
    # tolerate float drift in rescaled weights before rounding down
    return int(np.floor(sizes.min() + 1e-9))

def coreset_size_g(epsilon,n,k,d,delta,C_g=DEFAULT_C_G):
    if not 0 < epsilon <= 0.5:
        raise ConfigurationError('coreset precision must lie in (0, 1/2]')
    size = int(math.ceil(C_g * k * d * math.log(2 / delta) / epsilon**2))
    return max(1,min(size,n))

def _seed_centers(X,w,k,rng,power):
    n = len(X)
    p = w / w.sum()
    centers = [X[rng.choice(n,p=p)]]
    closest = cdist(X,centers[0].reshape(1,-1),'euclidean')[:,0] ** power
    for _ in range(1,k):
        mass = w * closest
        total = mass.sum()
        index = rng.choice(n,p=mass / total) if total > 0 else rng.choice(n,p=p)
        centers.append(X[index])
        closest = np.minimum(closest,cdist(X,X[index].reshape(1,-1),'euclidean')[:,0] ** power)
    return np.array(centers)

def _repair_empty(X,centers,labels,D,k):
    counts = np.bincount(labels,minlength=k)
    own = D[np.arange(len(X)),labels].copy()
    for c in np.flatnonzero(counts == 0):
        far = int(np.argmax(own))
        centers[c] = X[far]
        labels[far] = c
        own[far] = 0.0
    return centers, labels

def _lloyd(X,w,centers,max_iter=300):
    k = len(centers)
    labels = None
    for _ in range(max_iter):
        D = cdist(X,centers,'sqeuclidean')
        new_labels = np.argmin(D,axis=1)
        if labels is not None and np.array_equal(new_labels,labels):
            break
        labels = new_labels
        centers, labels = _repair_empty(X,centers.copy(),labels,D,k)
        for c in range(k):
            mask = labels == c
            total = w[mask].sum()
            if total > 0:
                centers[c] = np.dot(w[mask],X[mask]) / total
    return centers

def weiszfeld(X,w,start=None,max_iter=500,tol=1e-12):
    """Weighted geometric median by smoothed Weiszfeld iterations."""
    y = np.dot(w,X) / w.sum() if start is None else np.array(start,dtype=np.float64)
    for _ in range(max_iter):
        coef = w / (np.linalg.norm(X - y,axis=1) + WEISZFELD_SMOOTHING)
        y_new = np.dot(coef,X) / coef.sum()
        moved = np.linalg.norm(y_new - y)
        y = y_new
        if moved <= tol * (1.0 + np.linalg.norm(y)):
            break
    return y

def _median_center(X,w,start):
    y = weiszfeld(X,w,start)
    best = float(np.dot(w,np.linalg.norm(X - y,axis=1)))
    # iterates stall near data points; the nearest ones are exact candidates
    near = np.argsort(np.linalg.norm(X - y,axis=1))[:8]
    for i in near:
        cost = float(np.dot(w,np.linalg.norm(X - X[i],axis=1)))
        if cost <= best:
            best, y = cost, X[i].copy()
    return y

def _alternate_median(X,w,centers,max_rounds=100):
    k = len(centers)
    previous = math.inf
    for _ in range(max_rounds):
        D = cdist(X,centers,'euclidean')
        labels = np.argmin(D,axis=1)
        centers, labels = _repair_empty(X,centers.copy(),labels,D,k)
        for c in range(k):
            mask = labels == c
            if np.any(mask):
                centers[c] = _median_center(X[mask],w[mask],centers[c])
        cost = clustering_cost(X,centers,MEDIAN,w)
        if cost >= previous * (1 - 1e-12):
            break
        previous = cost
    return centers

def solve(data,k,restarts=10,seed=0,objective=MEANS,weights=None):
    _check_objective(objective)
    if k < 1 or restarts < 1:
        raise ConfigurationError('k and restarts must be positive')
    X, w = as_arrays(data,weights)
    if len(X) < k:
        return NotReady(reason='{0} summary points for k={1}'.format(len(X),k))
    best = None
    for r in range(restarts):
        rng = np.random.default_rng(derive_seed(seed,r))
        centers = _seed_centers(X,w,k,rng,_power(objective))
        if objective == MEANS:
            centers = _lloyd(X,w,centers)
        else:
            centers = _alternate_median(X,w,centers)
        cost = clustering_cost(X,centers,objective,w)
        if best is None or cost < best[1]:
            best = (centers, cost)
    centers, cost = best
    return ClusteringResult(centers,cost,min_cluster_size(X,centers,w))

def _summary_objective(data,objective):
    if isinstance(data,CoresetSummary) and data.objective != objective:
        raise ContractError('summary was built for k-{0}'.format(data.objective))

def solve_kmeans(data,k,restarts=10,seed=0,weights=None):
    _summary_objective(data,MEANS)
    return solve(data,k,restarts,seed,MEANS,weights)

def solve_kmedian(data,k,restarts=10,seed=0,weights=None):
    _summary_objective(data,MEDIAN)
    return solve(data,k,restarts,seed,MEDIAN,weights)

def build_coreset(points,k,epsilon,delta,seed=0,objective=MEANS,C_g=DEFAULT_C_G,block_index=0):
    _check_objective(objective)
    if not 0 < epsilon <= 0.5 or not 0 < delta <= 0.5:
        raise ConfigurationError('coreset epsilon and delta must lie in (0, 1/2]')
    X, _ = as_arrays(points)
    n = len(X)
    if n < 1:
        raise InputError('coreset of an empty block')
    budget = dict(block_index=block_index,block_size=n,precision=epsilon,failure_budget=delta)
    if k > n:
        return BlockCoreset(X.copy(),np.ones(n),**budget)
    # merging duplicates is exact for every center set
    U, counts = np.unique(X,axis=0,return_counts=True)
    counts = counts.astype(np.float64)
    size = coreset_size_g(epsilon,n,k,X.shape[1],delta,C_g)
    if len(U) <= size:
        return BlockCoreset(U,counts,**budget)
    rng = np.random.default_rng(seed)
    power = _power(objective)
    bicriteria = _seed_centers(U,counts,k,rng,power)
    D = cdist(U,bicriteria,'euclidean')
    labels = np.argmin(D,axis=1)
    dist = D[np.arange(len(U)),labels] ** power
    cost = float(np.dot(counts,dist))
    mass = np.bincount(labels,weights=counts,minlength=k)
    sensitivity = counts / mass[labels]
    if cost > 0:
        sensitivity = sensitivity + counts * dist / cost
    q = sensitivity / sensitivity.sum()
    draws = rng.choice(len(U),size=size,p=q)
    chosen, hits = np.unique(draws,return_counts=True)
    weights = hits * counts[chosen] / (size * q[chosen])
    weights *= n / weights.sum()
    LOG.debug('block %d: %d points reduced to %d',block_index,n,len(chosen))
    return BlockCoreset(U[chosen],weights,**budget)

class CoresetSummary:
    def __init__(self,k,dimension,objective=MEANS,epsilon0=0.5,delta=0.1,C_g=DEFAULT_C_G,seed=0,ledger=None):
        _check_objective(objective)
        if k < 1 or dimension < 1:
            raise ConfigurationError('k and dimension must be positive')
        if not 0 < epsilon0 <= 0.5 or not 0 < delta <= 0.5:
            raise ConfigurationError('epsilon0 and delta must lie in (0, 1/2]')
        self.k = k
        self.dimension = dimension
        self.objective = objective
        self.epsilon0 = epsilon0
        self.delta = delta
        self.C_g = C_g
        self.seed = seed
        self.ledger = MemoryLedger() if ledger is None else ledger
        self.blocks = []
        self.buffer = []
        self.points_total = 0

    @property
    def block_index(self):
        return len(self.blocks)

    def block_capacity(self):
        return 1 << self.block_index

    def _words(self,count):
        return count * (self.dimension + 1)

    def stream_insert(self,point):
        return self.stream_insert_many(np.asarray(point,dtype=np.float64).reshape(1,-1))

    def stream_insert_many(self,points):
        points = np.asarray(points,dtype=np.float64)
        if points.ndim == 1:
            points = points.reshape(-1,1) if self.dimension == 1 else points.reshape(1,-1)
        if points.shape[1] != self.dimension:
            raise InputError('point of dimension {0} on a {1}-dimensional stream'.format(points.shape[1],self.dimension))
        if not np.all(np.isfinite(points)):
            raise InputError('non-finite coordinate')
        position = 0
        while position < len(points):
            pending = sum(len(b) for b in self.buffer)
            take = min(len(points) - position,self.block_capacity() - pending)
            chunk = points[position:position + take]
            self.buffer.append(chunk)
            self.ledger.allocate(self._words(len(chunk)))
            self.points_total += take
            position += take
            if pending + take == self.block_capacity():
                self._seal()
        return self

    def _seal(self):
        i = self.block_index
        block = np.concatenate(self.buffer)
        self.buffer = []
        self.ledger.release(self._words(len(block)))
        step = max(1,i)
        coreset = build_coreset(block,self.k,self.epsilon0 / step,self.delta / (FAILURE_SPLIT * step**2),
            seed=derive_seed(self.seed,i),objective=self.objective,C_g=self.C_g,block_index=i)
        self.ledger.allocate(self._words(len(coreset)))
        self.blocks.append(coreset)
        LOG.debug('sealed block %d of %d points into %d',i,len(block),len(coreset))

    def arrays(self):
        if not self.blocks:
            return np.empty((0,self.dimension)), np.empty(0)
        X = np.concatenate([b.coordinates for b in self.blocks])
        w = np.concatenate([b.weights for b in self.blocks])
        return X, w

    @property
    def size(self):
        return sum(len(b) for b in self.blocks)

    @property
    def sealed_points(self):
        return sum(b.block_size for b in self.blocks)

    def size_bound(self):
        """Union size allowed for n points: g(1/log n, n) * log n."""
        n = max(2,self.points_total)
        log_n = math.log2(n)
        precision = min(0.5,1.0 / log_n)
        return coreset_size_g(precision,n,self.k,self.dimension,self.delta,self.C_g) * log_n

    def __repr__(self):
        return 'CoresetSummary(n={0}, blocks={1}, size={2})'.format(self.points_total,len(self.blocks),self.size)

def center_shift(c_from,c_to):
    c_from = np.asarray(c_from,dtype=np.float64)
    c_to = np.asarray(c_to,dtype=np.float64)
    return float(cdist(c_from.reshape(len(c_from),-1),c_to.reshape(len(c_to),-1)).min(axis=1).max())

def cost_shift_bound(points,c1,c2,objective=MEANS,weights=None):
    """Upper bound on cost(c1, P) from cost(c2, P) and the distance of c2 to c1."""
    X, w = as_arrays(points,weights)
    alpha = center_shift(c2,c1)
    n = float(w.sum())
    base = clustering_cost(X,c2,objective,w)
    if objective == MEANS:
        return base + n * alpha**2 + 2 * alpha * math.sqrt(n * base)
    return base + n * alpha

def center_proximity_bound(cost_opt,f_n,objective=MEANS):
    if f_n <= 0:
        return math.inf
    return (12.0 if objective == MEANS else 6.0) * cost_opt / f_n
