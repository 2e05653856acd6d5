import logging
from collections import Counter

import numpy as np

from exact_stream import ContractError
from exact_stream.coreset_clustering import MEANS, ClusteringResult, as_arrays, min_cluster_size, _check_objective

LOG = logging.getLogger(__name__)

ORACLE_CAP = 2**17
TINY_POINTS = 14
TINY_K = 3
GRID_PITCH = 1e-3
WEISZFELD_ROUNDS = 1000

def check_cap(n,cap=ORACLE_CAP):
    if n > cap:
        raise ContractError('oracle holds at most {0} rows, got {1}'.format(cap,n))

class ExactCounter:
    def __init__(self):
        self.counts = Counter()
        self.items_total = 0

    def insert(self,item):
        self.counts[int(item)] += 1
        self.items_total += 1

    def insert_many(self,items):
        values, counts = np.unique(np.asarray(items,dtype=np.int64),return_counts=True)
        for v, c in zip(values.tolist(),counts.tolist()):
            self.counts[v] += c
        self.items_total += int(counts.sum())

    @property
    def f2(self):
        return sum(c * c for c in self.counts.values())

def exact_f2(stream):
    counter = ExactCounter()
    counter.insert_many(list(stream))
    return counter.f2

def exact_least_squares(A,b):
    A = np.asarray(A,dtype=np.float64)
    b = np.asarray(b,dtype=np.float64).ravel()
    if A.ndim == 1:
        A = A.reshape(-1,1)
    if len(A) < 1 or len(A) != len(b):
        raise ContractError('least squares needs matching nonempty A and b')
    check_cap(len(A))
    x, _, _, _ = np.linalg.lstsq(A,b,rcond=None)
    return x, float(np.linalg.norm(A @ x - b))

def exact_matmul(A,B):
    A = np.asarray(A,dtype=np.float64)
    B = np.asarray(B,dtype=np.float64)
    if A.ndim == 1:
        A = A.reshape(-1,1)
    if B.ndim == 1:
        B = B.reshape(-1,1)
    if A.shape[0] != B.shape[0]:
        raise ContractError('cannot multiply {0} by {1} row-wise'.format(A.shape,B.shape))
    check_cap(len(A))
    return np.einsum('ij,ik->jk',A,B)

def _subset_members(n):
    masks = np.arange(1,1 << n)
    return ((masks[:,None] >> np.arange(n)) & 1).astype(bool)

def _means_subsets(X,w,member):
    mw = member * w
    total = mw.sum(axis=1)
    centers = (mw @ X) / total[:,None]
    cost = np.einsum('sn,sn->s',mw,((X[None,:,:] - centers[:,None,:])**2).sum(axis=2))
    return cost, centers

def _median_costs(X,w,member,centers):
    dist = np.linalg.norm(X[None,:,:] - centers[:,None,:],axis=2)
    return ((member * w) * dist).sum(axis=1)

def _median_subsets(X,w,member):
    n, d = X.shape
    if d == 1:
        order = np.argsort(X[:,0])
        mw = (member * w)[:,order]
        cumulative = np.cumsum(mw,axis=1)
        half = cumulative[:,-1:] / 2.0
        position = np.argmax(cumulative >= half,axis=1)
        centers = X[order][position]
        return _median_costs(X,w,member,centers), centers
    mw = member * w
    centers = (mw @ X) / mw.sum(axis=1)[:,None]
    for _ in range(WEISZFELD_ROUNDS):
        dist = np.linalg.norm(X[None,:,:] - centers[:,None,:],axis=2) + 1e-12
        coef = mw / dist
        updated = (coef @ X) / coef.sum(axis=1)[:,None]
        moved = np.abs(updated - centers).max()
        centers = updated
        if moved < 1e-13:
            break
    cost = _median_costs(X,w,member,centers)
    # polish on a grid of pitch 1e-3 of the bounding box, and on the data points
    pitch = GRID_PITCH * np.maximum(X.max(axis=0) - X.min(axis=0),1e-12)
    offsets = np.stack(np.meshgrid(*[np.arange(-2,3)] * d,indexing='ij'),axis=-1).reshape(-1,d) * pitch
    for shift in offsets:
        moved = centers + shift
        moved_cost = _median_costs(X,w,member,moved)
        better = moved_cost < cost
        centers[better], cost[better] = moved[better], moved_cost[better]
    for i in range(n):
        at_point = np.broadcast_to(X[i],centers.shape)
        point_cost = _median_costs(X,w,member,at_point)
        better = point_cost < cost
        centers[better], cost[better] = X[i], point_cost[better]
    return cost, centers

def _assignments(n,k,chunk=1 << 15):
    # point 0 always sits in cluster 0; the remaining labels run over all k^(n-1) codes
    powers = k ** np.arange(n - 1)
    for start in range(0,k ** (n - 1),chunk):
        codes = np.arange(start,min(start + chunk,k ** (n - 1)))
        labels = (codes[:,None] // powers) % k
        yield np.hstack([np.zeros((len(codes),1),dtype=labels.dtype),labels])

def optimal_clustering_tiny(points,k,objective=MEANS,weights=None):
    _check_objective(objective)
    X, w = as_arrays(points,weights)
    n = len(X)
    if n > TINY_POINTS or k > TINY_K or n < 1 or k < 1:
        raise ContractError('tiny oracle handles 1..{0} points and k in 1..{1}'.format(TINY_POINTS,TINY_K))
    if k >= n:
        centers = np.vstack([X] + [X[:1]] * (k - n))
        return ClusteringResult(centers,0.0,min_cluster_size(X,centers,w))
    member = _subset_members(n)
    if objective == MEANS:
        subset_cost, subset_center = _means_subsets(X,w,member)
    else:
        subset_cost, subset_center = _median_subsets(X,w,member)
    bits = 1 << np.arange(n)
    best_cost, best_masks = np.inf, None
    for labels in _assignments(n,k):
        masks = np.stack([((labels == c) * bits).sum(axis=1) for c in range(k)],axis=1)
        costs = np.where(masks > 0,subset_cost[np.maximum(masks,1) - 1],0.0).sum(axis=1)
        i = int(np.argmin(costs))
        if costs[i] < best_cost:
            best_cost, best_masks = float(costs[i]), masks[i]
    centers = np.array([subset_center[m - 1] if m > 0 else X[0] for m in best_masks])
    return ClusteringResult(centers,best_cost,min_cluster_size(X,centers,w))
