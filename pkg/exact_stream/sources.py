import re

import numpy as np

from exact_stream.generators import Stream, ITEMS, POINTS, ROWS

# formats on disk, one record per line:
#   f2      - a decimal unsigned integer
#   cluster - d comma separated decimals
#   regress - d comma separated features followed by the target
#   matmul  - d entries of A followed by d_prime entries of B

class InputParseError(Exception):
    pass

# ASCII only: str.isdigit also accepts superscripts and other scripts
DIGITS = re.compile('[0-9]+')

def _lines(path):
    with open(path,'r',encoding='utf-8') as f:
        for number, line in enumerate(f,start=1):
            line = line.strip()
            if line:
                yield number, line

ITEM_LIMIT = 2**63

def _items(path):
    items = []
    for number, line in _lines(path):
        if not DIGITS.fullmatch(line):
            raise InputParseError('line {0}: expected an unsigned integer, got {1!r}'.format(number,line))
        item = int(line)
        if item >= ITEM_LIMIT:
            raise InputParseError('line {0}: item {1} does not fit a 64-bit word'.format(number,line))
        items.append(item)
    return Stream(ITEMS,np.array(items,dtype=np.int64))

def _rows(path,width):
    rows = []
    for number, line in _lines(path):
        try:
            row = [float(v) for v in line.split(',')]
        except ValueError:
            raise InputParseError('line {0}: expected comma separated decimals, got {1!r}'.format(number,line))
        if width is not None and len(row) != width:
            raise InputParseError('line {0}: expected {1} values, got {2}'.format(number,width,len(row)))
        if not np.all(np.isfinite(row)):
            raise InputParseError('line {0}: non-finite value'.format(number))
        if width is None:
            width = len(row)
        rows.append(row)
    return np.array(rows,dtype=np.float64).reshape(-1,width or 0)

def parse_input(path,task,d=None,d_prime=None):
    if task == 'f2':
        return _items(path)
    if task == 'cluster':
        return Stream(POINTS,_rows(path,d))
    if task == 'regress':
        rows = _rows(path,None if d is None else d + 1)
        return Stream(ROWS,rows[:,:-1],rows[:,-1])
    if task == 'matmul':
        width = None if d is None or d_prime is None else d + d_prime
        return Stream(ROWS,_rows(path,width),meta={'d': d,'d_prime': d_prime})
    raise InputParseError('no input format for task {0}'.format(task))

def _format_row(values):
    return ','.join(repr(float(v)) for v in values)

def write_stream(stream,path):
    with open(path,'w',encoding='utf-8') as f:
        if stream.kind == ITEMS:
            for item in stream.data:
                f.write('{0}\n'.format(int(item)))
        elif stream.targets is not None:
            for row, target in zip(stream.data,stream.targets):
                f.write(_format_row(list(row) + [target]) + '\n')
        else:
            for row in stream.data:
                f.write(_format_row(row) + '\n')
    return path
