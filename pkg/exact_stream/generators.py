from pyparsing import Word, alphas, alphanums, Suppress, Group, Optional, ParseException, delimited_list, pyparsing_common

import numpy as np

from exact_stream.sketch_core import derive_seed

class InvalidGenerator(Exception):
    pass

ident = Word(alphas, alphanums + "-_")
assignment = Group(ident("key") + Suppress("=") + pyparsing_common.number("value"))
descriptor = ident("name") + Optional(Suppress("(") + Optional(Group(delimited_list(assignment))("args")) + Suppress(")"))

ITEMS = 'items'
POINTS = 'points'
ROWS = 'rows'

class Stream:
    """A generated or parsed stream held in memory.

    kind items: data is an int array; points: data is (n, d); rows: data is
    (n, d) with targets (n,) for regression or None for matrix pairs.
    """
    def __init__(self,kind,data,targets=None,meta=None):
        self.kind = kind
        self.data = data
        self.targets = targets
        self.meta = meta or {}

    def __len__(self):
        return len(self.data)

    def __eq__(self,other):
        if not isinstance(other,Stream) or self.kind != other.kind:
            return False
        if not np.array_equal(self.data,other.data):
            return False
        if self.targets is None or other.targets is None:
            return self.targets is None and other.targets is None
        return np.array_equal(self.targets,other.targets)

    def __repr__(self):
        return 'Stream({0}, n={1})'.format(self.kind,len(self))

def parse_descriptor(spec):
    try:
        parsed = descriptor.parseString(spec,parseAll=True)
    except ParseException as e:
        raise InvalidGenerator('generator {0!r} could not be parsed: {1}'.format(spec,e))
    args = {}
    for a in parsed.get('args',[]):
        if a['key'] in args:
            raise InvalidGenerator('argument {0} given twice'.format(a['key']))
        args[a['key']] = a['value']
    return parsed['name'], args

def _uniform_int(rng,n,N=16):
    return Stream(ITEMS,rng.integers(1,int(N) + 1,size=n))

def _zipf_int(rng,n,N=1000,s=1.2):
    ranks = np.arange(1,int(N) + 1)
    p = ranks ** -float(s)
    return Stream(ITEMS,rng.choice(ranks,size=n,p=p / p.sum()))

def _constant_item(rng,n,c=1):
    return Stream(ITEMS,np.full(n,int(c),dtype=np.int64))

def _gaussian_mixture(rng,n,k=3,d=2,separation=10.0,sigma=1.0):
    k, d = int(k), int(d)
    centers = rng.normal(size=(k,d))
    if k > 1:
        gaps = np.linalg.norm(centers[:,None,:] - centers[None,:,:],axis=2)
        centers *= separation * sigma / gaps[np.triu_indices(k,1)].min()
    labels = rng.integers(0,k,size=n)
    points = centers[labels] + sigma * rng.normal(size=(n,d))
    return Stream(POINTS,points,meta={'centers': centers,'labels': labels})

def _regression_rows(rng,n,d=5,noise=1.0):
    d = int(d)
    planted = rng.normal(size=d)
    A = rng.normal(size=(n,d))
    b = A @ planted + noise * rng.normal(size=n)
    return Stream(ROWS,A,b,meta={'planted': planted})

def _matrix_pair(rng,n,d=3,d_prime=2):
    return Stream(ROWS,rng.normal(size=(n,int(d) + int(d_prime))),meta={'d': int(d),'d_prime': int(d_prime)})

GENERATORS = {
    'uniform-int': _uniform_int,
    'zipf-int': _zipf_int,
    'constant-item': _constant_item,
    'gaussian-mixture': _gaussian_mixture,
    'regression-rows': _regression_rows,
    'matrix-pair': _matrix_pair,
}

def generate_stream(spec,seed,n):
    name, args = parse_descriptor(spec)
    if name not in GENERATORS:
        raise InvalidGenerator('unknown generator {0}, expected one of {1}'.format(name,', '.join(sorted(GENERATORS))))
    rng = np.random.default_rng(derive_seed(seed))
    try:
        return GENERATORS[name](rng,n,**args)
    except TypeError:
        raise InvalidGenerator('invalid arguments for {0}: {1}'.format(name,', '.join(sorted(args))))
    except ValueError as e:
        raise InvalidGenerator('invalid values for {0}: {1}'.format(name,e))
