"""Plain Euclidean expansive DCNN written independently of the package.

Convolutions use ``np.convolve`` row by row and gradients are derived by
hand, so agreement with the package at ``c = 0`` checks the tape, the
Toeplitz layer code and the training loop together.
"""

import numpy as np


def conv_full(w, h):
    return np.stack([np.convolve(row, w, mode="full") for row in h])


def forward(arrays, x):
    *layers, a = arrays
    h = x
    cache = []
    for k in range(0, len(layers), 2):
        w, b = layers[k], layers[k + 1]
        z = conv_full(w, h) + b
        cache.append((h, z))
        h = np.maximum(z, 0.0)
    return h @ a, h, cache


def loss(arrays, x, y):
    out, _, _ = forward(arrays, x)
    return float(np.mean((out - y) ** 2))


def grads(arrays, x, y):
    *layers, a = arrays
    out, h_last, cache = forward(arrays, x)
    d_out = 2.0 * (out - y) / len(y)
    g_a = h_last.T @ d_out
    dh = np.outer(d_out, a)
    g_layers = []
    for k in reversed(range(len(cache))):
        h_prev, z = cache[k]
        w = layers[2 * k]
        dz = dh * (z > 0)
        g_b = dz.sum(axis=0)
        g_w = sum(np.correlate(dz[i], h_prev[i], mode="valid") for i in range(len(dz)))
        dh = np.stack([np.correlate(dz[i], w, mode="valid") for i in range(len(dz))])
        g_layers = [g_w, g_b] + g_layers
    return g_layers + [g_a]


def train(arrays, train_x, train_y, test_x, test_y, lr, weight_decay, epochs, batches_per_epoch):
    """``batches_per_epoch`` is a list (one entry per epoch) of index arrays."""
    arrays = [a.copy() for a in arrays]
    history = []
    for epoch in range(epochs):
        for idx in batches_per_epoch[epoch]:
            g = grads(arrays, train_x[idx], train_y[idx])
            arrays = [p - lr * (gp + weight_decay * p) for p, gp in zip(arrays, g)]
        test_pred, _, _ = forward(arrays, test_x)
        history.append((loss(arrays, train_x, train_y), float(np.sqrt(np.mean((test_pred - test_y) ** 2)))))
    return history
