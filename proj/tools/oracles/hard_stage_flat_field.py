"""Independent numpy model of the BM3D hard stage on a flat noisy field.

Reports the fraction of interior pixels within 3 grey levels of the true
value and the residual standard deviation. Used to pick the bounds in
tests/unit/test_bm3d.cpp. Usage: python3 hard_stage_flat_field.py SEED
"""
import numpy as np, sys
from scipy.fft import dctn, idctn
from scipy.special import i0

def haar_mat(n):
    if n == 1: return np.ones((1,1))
    h = haar_mat(n//2)
    top = np.kron(h, [1,1]) / np.sqrt(2)
    bot = np.kron(np.eye(n//2), [1,-1]) / np.sqrt(2)
    return np.vstack([top, bot])

def grid(ext, p, s):
    g = list(range(0, ext-p+1, s))
    if g[-1] != ext-p: g.append(ext-p)
    return g

def hard(img, sigma, lam=2.7, p=8, step=3, win=39, N=16, thr=2500, keep_dc_all=False):
    H, W = img.shape
    num = np.zeros_like(img); den = np.zeros_like(img)
    k1 = np.kaiser(p, 2.0); K = np.outer(k1, k1)
    half = win//2
    for r in grid(H,p,step):
        for c in grid(W,p,step):
            ref = img[r:r+p, c:c+p]
            cands = []
            for dr in range(-(half//step)*step, half+1, step):
                for dc in range(-(half//step)*step, half+1, step):
                    rr, cc = r+dr, c+dc
                    if rr<0 or cc<0 or rr+p>H or cc+p>W: continue
                    d = np.mean((img[rr:rr+p,cc:cc+p]-ref)**2)
                    if d < thr or (dr==0 and dc==0): cands.append((0 if (dr==0 and dc==0) else 1, d, rr, cc))
            cands.sort()
            n = 1
            while n*2 <= min(N, len(cands)): n *= 2
            cands = cands[:n]
            G = np.stack([img[rr:rr+p,cc:cc+p] for _,_,rr,cc in cands])
            T = np.stack([dctn(g, norm='ortho') for g in G])
            Hm = haar_mat(n)
            T3 = np.tensordot(Hm, T, axes=1)
            mask = np.abs(T3) >= lam*sigma
            mask[0,0,0] = True
            if keep_dc_all: mask[:,0,0] = True
            T3 = T3*mask
            nr = mask.sum()
            w = 1.0/(sigma**2*nr)
            E = np.tensordot(Hm.T, T3, axes=1)
            for (_,_,rr,cc), e in zip(cands, E):
                est = idctn(e, norm='ortho')
                num[rr:rr+p,cc:cc+p] += w*K*est
                den[rr:rr+p,cc:cc+p] += w*K
    return num/den

rng = np.random.default_rng(int(sys.argv[1]) if len(sys.argv)>1 else 0)
noisy = np.clip(np.round(128 + 25*rng.standard_normal((96,96))), 0, 255)
out = np.round(hard(noisy, 25.0))
inner = out[8:88, 8:88]
print("within3 frac", np.mean(np.abs(inner-128) <= 3), "std", np.std(out-128))
