import sys, cvc5
args = sys.argv[1:]
path = args[-1]
opts = args[:-1]
tm = cvc5.TermManager()
s = cvc5.Solver(tm)
s.setOption('incremental', 'false')
for o in opts:
    o = o.lstrip('-')
    if '=' in o:
        k, v = o.split('=', 1)
    elif o.startswith('no-'):
        k, v = o[3:], 'false'
    else:
        k, v = o, 'true'
    s.setOption(k, v)
p = cvc5.InputParser(s)
p.setFileInput(cvc5.InputLanguage.SMT_LIB_2_6, path)
sm = p.getSymbolManager()
while True:
    cmd = p.nextCommand()
    if cmd.isNull():
        break
    out = cmd.invoke(s, sm)
    if out:
        sys.stdout.write(out)
        sys.stdout.flush()
