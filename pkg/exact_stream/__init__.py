import math

name = 'exact_stream'
__version__ = '0.1.0'

class StreamError(Exception):
    pass

class ConfigurationError(StreamError):
    pass

class RangeError(StreamError):
    pass

class InputError(StreamError):
    pass

class DimensionError(StreamError):
    pass

class ContractError(StreamError):
    pass

# returned, never raised: callers poll until a query becomes answerable
class NotReady:
    ready = False

    def __init__(self,bound=math.inf,reason=''):
        self.bound = bound
        self.reason = reason

    def __bool__(self):
        return False

    def __repr__(self):
        return 'NotReady(bound={0}, reason={1!r})'.format(self.bound,self.reason)

class Estimate:
    ready = True

    def __init__(self,value,bound):
        self.value = value
        self.bound = bound

    def __iter__(self):
        return iter((self.value,self.bound))

    def __repr__(self):
        return 'Estimate(value={0}, bound={1})'.format(self.value,self.bound)

def human_words(words,precision=2):
    suffixes = ['', 'K', 'M', 'G', 'T']
    suffix_index = 0
    while words > 1000 and suffix_index < 4:
        suffix_index += 1
        words = words/1000.0
    return "%.*f%sw" % (precision,words,suffixes[suffix_index])
