import sys
import time
import logging
import argparse
from exact_stream import StreamError, human_words
from exact_stream.config import Config, InvalidConfig, TASKS, CHECKPOINTS, POLICIES, OBJECTIVES
from exact_stream.generators import InvalidGenerator
from exact_stream.sources import InputParseError
from exact_stream.experiment import run_experiment, run_to_file, run_batch, write_records

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_INPUT = 3
EXIT_CONTRACT = 4

def on_off(value):
	if value not in ('on','off'):
		raise argparse.ArgumentTypeError('expected on or off, got {0}'.format(value))
	return value == 'on'

def get_parser():
	parser = argparse.ArgumentParser(description='Run asymptotically exact streaming estimators and record their error trajectories.')
	parser.add_argument('--task', required=True, choices=TASKS, help='Estimator to run, or oracle/gen')
	parser.add_argument('--config', dest='config', help='YAML file overriding the default constants.')
	parser.add_argument('--seed', type=int)
	parser.add_argument('--epsilon0', type=float)
	parser.add_argument('--delta', type=float)
	parser.add_argument('--n0', type=int, help='Base block size of the schedule')
	parser.add_argument('--k', type=int)
	parser.add_argument('--d', type=int)
	parser.add_argument('--d-prime', dest='d_prime', type=int, help='Columns of B for matmul')
	parser.add_argument('--policy', choices=POLICIES, help='F2 sketch policy')
	parser.add_argument('--mode', help='Schedule for regress (regression, subspace), problem for oracle (f2, cluster, regress, matmul)')
	parser.add_argument('--objective', choices=OBJECTIVES)
	parser.add_argument('--alpha', type=float)
	parser.add_argument('--checkpoints', choices=CHECKPOINTS)
	source = parser.add_mutually_exclusive_group()
	source.add_argument('--input', help='Stream file in the task input format')
	source.add_argument('--gen', help='Generator, e.g. uniform-int(N=16) or gaussian-mixture(k=3,d=2)')
	parser.add_argument('--n', type=int, help='Maximum stream length')
	parser.add_argument('--out', help='Output path (default: stdout)')
	parser.add_argument('--oracle', type=on_off, help='on|off')
	parser.add_argument('--timing', type=on_off, help='on|off, record elapsed_ns')
	parser.add_argument('--seeds', type=int, default=1, help='Independent seeds run in parallel, one output file each')
	parser.add_argument('-v','--verbose', action='store_true')
	return parser

def build_config(parsed):
	config_txt = None
	if parsed.config:
		with open(parsed.config,'r') as f:
			config_txt = f.read()
	config, errors = Config.validate(config_txt)
	if errors:
		raise InvalidConfig('; '.join(errors))
	overrides = {key: getattr(parsed,key) for key in ('seed','epsilon0','delta','n0','k','d','d_prime','policy','mode',
		'objective','alpha','checkpoints','input','gen','n','out','oracle','timing')}
	return config.run_config(parsed.task,**overrides)

def main(argv=None):
	parser = get_parser()
	parsed = parser.parse_args(argv)
	logging.basicConfig(level=logging.DEBUG if parsed.verbose else logging.WARNING,
		format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr)

	try:
		config = build_config(parsed)
		if config.task == 'gen' and not config.out:
			raise InvalidConfig('--task gen needs --out')
		if parsed.seeds > 1 and not config.out:
			raise InvalidConfig('--seeds needs --out')
		start_time = time.time()
		if parsed.seeds > 1:
			outputs = run_batch(config,parsed.seeds)
		elif config.out:
			outputs = [run_to_file(config,config.out)]
		else:
			write_records(run_experiment(config),sys.stdout)
			outputs = []
	except (InvalidConfig, InvalidGenerator) as e:
		print('usage error: {0}'.format(e),file=sys.stderr)
		return EXIT_USAGE
	except (InputParseError, OSError) as e:
		print('input error: {0}'.format(e),file=sys.stderr)
		return EXIT_INPUT
	except StreamError as e:
		print('contract violation: {0}'.format(e),file=sys.stderr)
		return EXIT_CONTRACT

	if outputs:
		print('Completed in {0} seconds.'.format(time.time() - start_time))
		for path, peak in outputs:
			if config.task == 'gen':
				print(path)
			else:
				print('{0} (peak sketch memory {1})'.format(path,human_words(peak)))
	return EXIT_OK
