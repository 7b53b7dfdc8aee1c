// Generated multilayer-perceptron classifier.
// algorithm=de seed=42 fitness=0.96 generations=17
// layers=[3, 2, 3] activation=tanh
// Inputs are raw-scale features; the stored input transform
// (x - shift) / divisor is applied before the forward pass.
public final class Classifier {
    private static final int[] LAYERS = {3, 2, 3};
    private static final double[] WEIGHTS = {
        -6.6666666666666663e-1, -5.4333333333333333e-1, -4.1999999999999998e-1, -2.9666666666666669e-1,
        -1.7333333333333334e-1, -4.9999999999999968e-2, 7.3333333333333250e-2, 1.9666666666666663e-1,
        3.2000000000000001e-1, 4.4333333333333336e-1, 5.6666666666666676e-1, 6.9000000000000006e-1,
        8.1333333333333313e-1, 9.3666666666666654e-1, 1.0599999999999998e0, 1.1833333333333333e0,
        1.3066666666666666e0,
    };
    private static final double[] SHIFT = {
        5.0000000000000000e-1, -1.2500000000000000e0, 3.0000000000000000e0,
    };
    private static final double[] DIVISOR = {
        2.0000000000000000e0, 1.0000000000000001e-1, 0.0000000000000000e0,
    };
    private static final String[] CLASSES = {"setosa", "say \"hi\"", "back\\slash"};

    private Classifier() {}

    private static double activation(double x) {
        return Math.tanh(x);
    }

    public static double[] scores(double[] features) {
        if (features.length != LAYERS[0]) {
            throw new IllegalArgumentException("expected " + LAYERS[0] + " features, got " + features.length);
        }
        double[] a = new double[LAYERS[0]];
        for (int i = 0; i < LAYERS[0]; i++) {
            a[i] = DIVISOR[i] == 0.0 ? 0.0 : (features[i] - SHIFT[i]) / DIVISOR[i];
        }
        int offset = 0;
        for (int layer = 1; layer < LAYERS.length; layer++) {
            int nIn = LAYERS[layer - 1];
            double[] out = new double[LAYERS[layer]];
            for (int j = 0; j < out.length; j++) {
                double total = 0.0;
                for (int i = 0; i < nIn; i++) {
                    total += WEIGHTS[offset + i] * a[i];
                }
                total += WEIGHTS[offset + nIn];
                out[j] = activation(total);
                offset += nIn + 1;
            }
            a = out;
        }
        return a;
    }

    public static String predict(double[] features) {
        double[] s = scores(features);
        int best = 0;
        for (int k = 1; k < s.length; k++) {
            if (s[k] > s[best]) {
                best = k;
            }
        }
        return CLASSES[best];
    }
}
