"""Generate idealized 10-10 unit-sphere electrode coordinates.

Cz = +z, Fpz = +y, T8 = +x. Equator electrodes sit every 18 degrees of
azimuth; lateral rows are circles through (left equator point, midline
point, right equator point) divided into equal angular steps.
"""
import numpy as np

def sph(polar_deg, az_deg):
    # az measured from +y (front) toward -x (left) is positive
    t, a = np.radians(polar_deg), np.radians(az_deg)
    return np.array([-np.sin(t) * np.sin(a), np.sin(t) * np.cos(a), np.cos(t)])

def circle_points(p0, p1, p2, n_steps):
    """Points dividing the arc p0->p1 (through circle p0,p1,p2) into n_steps."""
    # circle through three points
    a, b, c = p0, p1, p2
    ab, ac = b - a, c - a
    n = np.cross(ab, ac)
    center = a + (np.dot(ac, ac) * np.cross(n, ab) + np.dot(ab, ab) * np.cross(ac, n)) / (2 * np.dot(n, n))
    r = np.linalg.norm(a - center)
    u = (a - center) / r
    v = np.cross(n / np.linalg.norm(n), u)
    ang1 = np.arctan2(np.dot(b - center, v), np.dot(b - center, u))
    pts = []
    for k in range(n_steps + 1):
        t = ang1 * k / n_steps
        p = center + r * (np.cos(t) * u + np.sin(t) * v)
        pts.append(p / np.linalg.norm(p))
    return pts

pos = {}
# midline
for name, polar in [("Fpz", 90), ("AFz", 67.5), ("Fz", 45), ("FCz", 22.5), ("Cz", 0)]:
    pos[name] = sph(polar, 0)
for name, polar in [("CPz", 22.5), ("Pz", 45), ("POz", 67.5), ("Oz", 90), ("Iz", 112.5)]:
    pos[name] = sph(polar, 180)
# equator, left side (positive az), mirrored to right
eq = [("Fp1", "Fp2", 18), ("AF7", "AF8", 36), ("F7", "F8", 54), ("FT7", "FT8", 72),
      ("T7", "T8", 90), ("TP7", "TP8", 108), ("P7", "P8", 126), ("PO7", "PO8", 144), ("O1", "O2", 162)]
for l, r, az in eq:
    pos[l] = sph(90, az)
    pos[r] = sph(90, -az)
pos["T9"] = sph(112.5, 90)
pos["T10"] = sph(112.5, -90)
rows = [("AF", "AF7", "AFz", "AF8"), ("F", "F7", "Fz", "F8"), ("FC", "FT7", "FCz", "FT8"),
        ("C", "T7", "Cz", "T8"), ("CP", "TP7", "CPz", "TP8"), ("P", "P7", "Pz", "P8"),
        ("PO", "PO7", "POz", "PO8")]
for prefix, l, m, r in rows:
    left = circle_points(pos[l], pos[m], pos[r], 4)
    right = circle_points(pos[r], pos[m], pos[l], 4)
    for k, num in zip([1, 2, 3], [5, 3, 1]):
        pos[f"{prefix}{num}"] = left[k]
    for k, num in zip([1, 2, 3], [6, 4, 2]):
        pos[f"{prefix}{num}"] = right[k]

physionet = ["FC5","FC3","FC1","FCz","FC2","FC4","FC6","C5","C3","C1","Cz","C2","C4","C6",
             "CP5","CP3","CP1","CPz","CP2","CP4","CP6","Fp1","Fpz","Fp2","AF7","AF3","AFz","AF4","AF8",
             "F7","F5","F3","F1","Fz","F2","F4","F6","F8","FT7","FT8","T7","T8","T9","T10","TP7","TP8",
             "P7","P5","P3","P1","Pz","P2","P4","P6","P8","PO7","PO3","POz","PO4","PO8","O1","Oz","O2","Iz"]
assert len(physionet) == 64
for n in physionet:
    x, y, z = pos[n]
    print(f'    {{"{n}", {{{x:+.6f}, {y:+.6f}, {z:+.6f}}}}},')
