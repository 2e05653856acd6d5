import io
import json
import os
import shutil
import tempfile
import unittest
from contextlib import redirect_stdout, redirect_stderr

from exact_stream.cmd import main, EXIT_OK, EXIT_USAGE, EXIT_INPUT, EXIT_CONTRACT

class TestMain(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.mkdtemp()

    def tearDown(self):
        shutil.rmtree(self.tmp)

    def run_main(self,*argv):
        out, err = io.StringIO(), io.StringIO()
        with redirect_stdout(out), redirect_stderr(err):
            code = main(list(argv))
        return code, out.getvalue(), err.getvalue()

    def path(self,name):
        return os.path.join(self.tmp,name)

    def test_writes_trajectory(self):
        out = self.path('f2.jsonl')
        code, stdout, _ = self.run_main('--task','f2','--gen','constant-item(c=2)','--n','256','--out',out)
        self.assertEqual(code,EXIT_OK)
        self.assertIn('Completed in',stdout)
        self.assertIn(out,stdout)
        with open(out) as f:
            records = [json.loads(line) for line in f]
        self.assertEqual([r['n'] for r in records],[64,128,256])

    def test_stdout_without_out(self):
        code, stdout, _ = self.run_main('--task','oracle','--mode','f2','--n','128')
        self.assertEqual(code,EXIT_OK)
        self.assertEqual(len(stdout.splitlines()),2)

    def test_config_file(self):
        config = self.path('run.yml')
        with open(config,'w') as f:
            f.write('f2:\n  n0: 32\n')
        code, stdout, _ = self.run_main('--task','f2','--config',config,'--n','64')
        self.assertEqual(code,EXIT_OK)
        self.assertEqual([json.loads(line)['n'] for line in stdout.splitlines()],[32,64])

    def test_gen_then_replay(self):
        items = self.path('items.txt')
        code, _, _ = self.run_main('--task','gen','--gen','uniform-int(N=8)','--n','100','--out',items)
        self.assertEqual(code,EXIT_OK)
        code, stdout, _ = self.run_main('--task','f2','--input',items,'--n0','50')
        self.assertEqual(code,EXIT_OK)
        self.assertEqual(json.loads(stdout.splitlines()[-1])['n'],100)

    def test_seeds(self):
        out = self.path('batch.jsonl')
        code, stdout, _ = self.run_main('--task','f2','--n','128','--seeds','2','--out',out)
        self.assertEqual(code,EXIT_OK)
        self.assertTrue(os.path.exists(self.path('batch.seed0.jsonl')))
        self.assertTrue(os.path.exists(self.path('batch.seed1.jsonl')))

    def test_usage_errors(self):
        self.assertEqual(self.run_main('--task','f2','--gen','pareto(N=2)')[0],EXIT_USAGE)
        self.assertEqual(self.run_main('--task','f2','--epsilon0','0.9')[0],EXIT_USAGE)
        self.assertEqual(self.run_main('--task','gen','--gen','uniform-int')[0],EXIT_USAGE)
        self.assertEqual(self.run_main('--task','f2','--gen','uniform-int(N=0)')[0],EXIT_USAGE)
        with self.assertRaises(SystemExit) as raised:
            self.run_main('--task','sort')
        self.assertEqual(raised.exception.code,EXIT_USAGE)

    def test_input_errors(self):
        self.assertEqual(self.run_main('--task','f2','--input',self.path('absent.txt'))[0],EXIT_INPUT)
        bad = self.path('bad.txt')
        with open(bad,'w') as f:
            f.write('1\n2\nthree\n')
        code, _, stderr = self.run_main('--task','f2','--input',bad)
        self.assertEqual(code,EXIT_INPUT)
        self.assertIn('line 3',stderr)
        with open(bad,'w',encoding='utf-8') as f:
            f.write('1\n99999999999999999999\n\u00b2\n')
        code, _, stderr = self.run_main('--task','f2','--input',bad)
        self.assertEqual(code,EXIT_INPUT)
        self.assertIn('line 2',stderr)

    def test_contract_violation(self):
        big = self.path('big.txt')
        with open(big,'w') as f:
            f.write('{0}\n'.format(2**21))
        code, _, stderr = self.run_main('--task','f2','--input',big)
        self.assertEqual(code,EXIT_CONTRACT)
        self.assertIn('contract violation',stderr)

if __name__ == '__main__':
    unittest.main()
