import os
from dataclasses import dataclass, fields, replace

import yaml

DEFAULT_CONFIG = os.path.join(os.path.dirname(__file__),'configs/default.yml')

TASKS = ('f2', 'cluster', 'regress', 'matmul', 'oracle', 'gen')
CHECKPOINTS = ('pow2', 'pow8')
# which section of the document feeds each task's epsilon0, delta, n0, d
TASK_SECTIONS = {'f2': 'f2', 'cluster': 'cluster', 'regress': 'linalg', 'matmul': 'linalg', 'gen': 'f2'}
ORACLE_MODES = {'f2': 'f2', 'cluster': 'cluster', 'regress': 'linalg', 'matmul': 'linalg'}
REGRESS_MODES = ('regression', 'subspace')
POLICIES = ('two_sketch', 'parallel')
OBJECTIVES = ('means', 'median')

class InvalidConfig(Exception):
	pass

def _load(text,source):
	try:
		doc = yaml.safe_load(text)
	except yaml.YAMLError as e:
		raise InvalidConfig('{0} is not valid YAML: {1}'.format(source,e))
	if doc is None:
		return {}
	if not isinstance(doc,dict):
		raise InvalidConfig('{0} must be a YAML dict of sections'.format(source))
	for section, values in doc.items():
		if not isinstance(values,dict):
			raise InvalidConfig('section {0} in {1} must be a dict, not {2}'.format(section,source,type(values).__name__))
	return doc

class Config:
	def __init__(self,y=None):
		with open(DEFAULT_CONFIG,'r') as f:
			self.sections = _load(f.read(),'default configuration')
		if y:
			for section, values in _load(y,'configuration').items():
				if section not in self.sections:
					raise InvalidConfig('unknown section {0}'.format(section))
				for key, value in values.items():
					if key not in self.sections[section]:
						raise InvalidConfig('unknown key {0} in section {1}'.format(key,section))
					self.sections[section][key] = value

	@classmethod
	def validate(cls,y):
		try:
			return cls(y), None
		except InvalidConfig as e:
			return None, [str(e)]

	def get(self,section,key):
		return self.sections[section][key]

	def run_config(self,task,**overrides):
		if task not in TASKS:
			raise InvalidConfig('task must be one of {0}'.format(', '.join(TASKS)))
		mode = overrides.get('mode')
		if task == 'oracle':
			mode = mode or 'f2'
			if mode not in ORACLE_MODES:
				raise InvalidConfig('oracle mode must be one of {0}'.format(', '.join(ORACLE_MODES)))
			section = ORACLE_MODES[mode]
		else:
			section = TASK_SECTIONS[task]
		s = self.sections
		linalg = s['linalg']
		if task == 'matmul':
			mode = 'matmul'
		elif task == 'regress':
			mode = mode or linalg['mode']
		values = dict(
			task=task,
			seed=s['experiment']['seed'],
			epsilon0=s[section].get('epsilon0',s['f2']['epsilon0']),
			delta=s[section].get('delta',s['f2']['delta']),
			n0=s[section].get('n0',s['f2']['n0']),
			k=s['cluster']['k'],
			d=s[section].get('d',linalg['d']),
			d_prime=linalg['d_prime'],
			policy=s['f2']['policy'],
			mode=mode,
			alpha=linalg['alpha'],
			objective=s['cluster']['objective'],
			fixed_precision=linalg['fixed_precision'],
			universe=s['f2']['universe'],
			prime_modulus=s['sketch']['prime_modulus'],
			C=s['sketch']['C'],
			C_mem=s['sketch']['C_mem'],
			C_g=s['cluster']['C_g'],
			C_linalg=None,
			restarts=s['cluster']['restarts'],
			oracle_restarts=s['cluster']['oracle_restarts'],
			guard_c=linalg['guard_c'],
			guard_exponent=linalg['guard_exponent'],
			checkpoints=s['experiment']['checkpoints'],
			n=s['experiment']['n'],
			oracle=s['experiment']['oracle'],
			oracle_cap=s['experiment']['oracle_cap'],
			timing=s['experiment']['timing'],
		)
		values.update({k: v for k, v in overrides.items() if v is not None})
		if values['C_linalg'] is None and values['mode'] in ('regression', 'subspace', 'matmul'):
			values['C_linalg'] = linalg['C_' + values['mode']]
		return RunConfig(**values)

@dataclass(frozen=True)
class RunConfig:
	task: str
	seed: int = 0
	epsilon0: float = 0.5
	delta: float = 0.1
	n0: int = 64
	k: int = 3
	d: int = 2
	d_prime: int = 2
	policy: str = 'parallel'
	mode: str = None
	alpha: float = 0.5
	objective: str = 'means'
	fixed_precision: bool = False
	universe: int = 1 << 20
	prime_modulus: int = 2**31 - 1
	C: float = 8.0
	C_mem: float = 400.0
	C_g: float = 40.0
	C_linalg: float = None
	restarts: int = 10
	oracle_restarts: int = 50
	guard_c: float = 1000.0
	guard_exponent: float = 1.0
	checkpoints: str = 'pow2'
	input: str = None
	gen: str = None
	n: int = 65536
	out: str = None
	oracle: bool = True
	oracle_cap: int = 2**17
	timing: bool = False

	def __post_init__(self):
		if self.task not in TASKS:
			raise InvalidConfig('task must be one of {0}'.format(', '.join(TASKS)))
		if not 0 < self.epsilon0 <= 0.5:
			raise InvalidConfig('epsilon0 must lie in (0, 1/2], got {0}'.format(self.epsilon0))
		if not 0 < self.delta <= 0.5:
			raise InvalidConfig('delta must lie in (0, 1/2], got {0}'.format(self.delta))
		if self.checkpoints not in CHECKPOINTS:
			raise InvalidConfig('checkpoints must be one of {0}'.format(', '.join(CHECKPOINTS)))
		for name in ('n0', 'k', 'd', 'd_prime', 'n', 'restarts', 'oracle_restarts', 'universe'):
			if getattr(self,name) < 1:
				raise InvalidConfig('{0} must be positive'.format(name))
		if self.policy not in POLICIES:
			raise InvalidConfig('policy must be one of {0}'.format(', '.join(POLICIES)))
		if self.objective not in OBJECTIVES:
			raise InvalidConfig('objective must be one of {0}'.format(', '.join(OBJECTIVES)))
		if self.task == 'regress' and self.mode not in REGRESS_MODES:
			raise InvalidConfig('regress mode must be one of {0}'.format(', '.join(REGRESS_MODES)))
		if not 0 < self.alpha <= 1:
			raise InvalidConfig('alpha must lie in (0, 1], got {0}'.format(self.alpha))
		if self.input and self.gen:
			raise InvalidConfig('--input and --gen are exclusive')
		if not 0 <= self.seed < 2**64:
			raise InvalidConfig('seed must be a 64-bit unsigned integer')

	def with_seed(self,seed):
		return replace(self,seed=seed)

	def as_dict(self):
		return {f.name: getattr(self,f.name) for f in fields(self)}
