import numpy as np
rng = np.random.default_rng(1)
def direct(bfun, cfun, T, dt, N, x0=0.0):
    x = np.full(N, x0); S = np.zeros(N)
    for k in range(int(round(T/dt))):
        S += cfun(x) * dt
        x = x + bfun(x) * dt + np.sqrt(2*dt) * rng.standard_normal(N)
    m = S.max(); w = np.exp(S - m); mean = w.mean()
    val = (m + np.log(mean)) / T
    se = w.std(ddof=1) / np.sqrt(N) / mean / T
    ess = w.sum()**2 / (w**2).sum()
    return val, se, ess
def twisted(bt, logphi, rho, T, dt, N, x0=0.0):
    x = np.full(N, x0)
    for k in range(int(round(T/dt))):
        x = x + bt(x) * dt + np.sqrt(2*dt) * rng.standard_normal(N)
    w = np.exp(logphi(x0) - logphi(x))
    return rho + np.log(w.mean())/T, w.std(ddof=1)/np.sqrt(N)/w.mean()/T
for T in (5, 20, 50):
    print("ou direct T", T, direct(lambda x: -x, lambda x: -2*x*x, T, 0.01, 10000))
    print("ou twisted T", T, twisted(lambda x: -3*x, lambda x: -x*x/2, -1.0, T, 0.01, 10000))
