// Neutral face template: 120 landmarks in a nose-tip frame, meters.
// +X toward the subject's right, +Y up, +Z away from the sensor.
// Generated once and frozen; the mirror map pairs each landmark with its
// reflection across X = 0 (midline landmarks map to themselves).

pub(crate) const TEMPLATE: [[f64; 3]; 120] = [
    [0.0, 0.085, 0.05],         // 0
    [0.021, 0.08, 0.0531],      // 1
    [0.04, 0.0683, 0.0559],     // 2
    [0.055, 0.0502, 0.0581],    // 3
    [0.0647, 0.0273, 0.0595],   // 4
    [0.068, 0.002, 0.06],       // 5
    [0.0647, -0.0233, 0.0595],  // 6
    [0.055, -0.0462, 0.0581],   // 7
    [0.04, -0.0643, 0.0559],    // 8
    [0.021, -0.076, 0.0531],    // 9
    [0.0, -0.08, 0.03],         // 10
    [-0.021, -0.076, 0.0531],   // 11
    [-0.04, -0.0643, 0.0559],   // 12
    [-0.055, -0.0462, 0.0581],  // 13
    [-0.0647, -0.0233, 0.0595], // 14
    [-0.068, 0.002, 0.06],      // 15
    [-0.0647, 0.0273, 0.0595],  // 16
    [-0.055, 0.0502, 0.0581],   // 17
    [-0.04, 0.0683, 0.0559],    // 18
    [-0.021, 0.08, 0.0531],     // 19
    [0.012, 0.0399, 0.018],     // 20
    [0.023, 0.0429, 0.021],     // 21
    [0.034, 0.044, 0.024],      // 22
    [0.045, 0.0429, 0.027],     // 23
    [0.056, 0.0399, 0.03],      // 24
    [-0.012, 0.0399, 0.018],    // 25
    [-0.023, 0.0429, 0.021],    // 26
    [-0.034, 0.044, 0.024],     // 27
    [-0.045, 0.0429, 0.027],    // 28
    [-0.056, 0.0399, 0.03],     // 29
    [0.044, 0.024, 0.026],      // 30
    [0.038, 0.0283, 0.026],     // 31
    [0.026, 0.0283, 0.026],     // 32
    [0.02, 0.024, 0.026],       // 33
    [0.026, 0.0197, 0.026],     // 34
    [0.038, 0.0197, 0.026],     // 35
    [-0.044, 0.024, 0.026],     // 36
    [-0.038, 0.0283, 0.026],    // 37
    [-0.026, 0.0283, 0.026],    // 38
    [-0.02, 0.024, 0.026],      // 39
    [-0.026, 0.0197, 0.026],    // 40
    [-0.038, 0.0197, 0.026],    // 41
    [0.0, 0.045, 0.016],        // 42
    [0.0, 0.034, 0.012],        // 43
    [0.0, 0.023, 0.008],        // 44
    [0.0, 0.011, 0.004],        // 45
    [0.0, 0.0, 0.0],            // 46
    [0.016, 0.003, 0.013],      // 47
    [-0.016, 0.003, 0.013],     // 48
    [0.009, -0.009, 0.01],      // 49
    [-0.009, -0.009, 0.01],     // 50
    [0.026, -0.036, 0.013],     // 51
    [-0.026, -0.036, 0.013],    // 52
    [0.016, -0.028, 0.009],     // 53
    [-0.016, -0.028, 0.009],    // 54
    [0.007, -0.026, 0.006],     // 55
    [-0.007, -0.026, 0.006],    // 56
    [0.016, -0.043, 0.01],      // 57
    [-0.016, -0.043, 0.01],     // 58
    [0.007, -0.046, 0.008],     // 59
    [-0.007, -0.046, 0.008],    // 60
    [0.0, -0.025, 0.005],       // 61
    [0.0, -0.047, 0.007],       // 62
    [0.019, -0.036, 0.012],     // 63
    [-0.019, -0.036, 0.012],    // 64
    [0.008, -0.033, 0.009],     // 65
    [-0.008, -0.033, 0.009],    // 66
    [0.008, -0.039, 0.009],     // 67
    [-0.008, -0.039, 0.009],    // 68
    [0.0, -0.033, 0.008],       // 69
    [0.0, -0.039, 0.008],       // 70
    [0.04, 0.008, 0.028],       // 71
    [0.05, -0.004, 0.03],       // 72
    [0.038, -0.016, 0.024],     // 73
    [0.048, -0.026, 0.03],      // 74
    [0.058, 0.01, 0.036],       // 75
    [0.056, -0.04, 0.036],      // 76
    [-0.04, 0.008, 0.028],      // 77
    [-0.05, -0.004, 0.03],      // 78
    [-0.038, -0.016, 0.024],    // 79
    [-0.048, -0.026, 0.03],     // 80
    [-0.058, 0.01, 0.036],      // 81
    [-0.056, -0.04, 0.036],     // 82
    [0.0, 0.06, 0.024],         // 83
    [0.012, 0.062, 0.026],      // 84
    [0.024, 0.064, 0.03],       // 85
    [0.036, 0.066, 0.034],      // 86
    [0.048, 0.068, 0.038],      // 87
    [-0.012, 0.062, 0.026],     // 88
    [-0.024, 0.064, 0.03],      // 89
    [-0.036, 0.066, 0.034],     // 90
    [-0.048, 0.068, 0.038],     // 91
    [0.0, 0.074, 0.034],        // 92
    [0.0, -0.064, 0.016],       // 93
    [0.012, -0.062, 0.02],      // 94
    [0.022, -0.056, 0.025],     // 95
    [0.032, -0.05, 0.03],       // 96
    [0.042, -0.044, 0.035],     // 97
    [0.052, -0.038, 0.04],      // 98
    [-0.012, -0.062, 0.02],     // 99
    [-0.022, -0.056, 0.025],    // 100
    [-0.032, -0.05, 0.03],      // 101
    [-0.042, -0.044, 0.035],    // 102
    [-0.052, -0.038, 0.04],     // 103
    [0.0, -0.055, 0.012],       // 104
    [0.062, 0.03, 0.045],       // 105
    [0.03, 0.012, 0.022],       // 106
    [0.022, -0.016, 0.014],     // 107
    [0.036, 0.04, 0.024],       // 108
    [0.044, 0.03, 0.03],        // 109
    [0.02, 0.03, 0.02],         // 110
    [0.052, -0.055, 0.04],      // 111
    [-0.062, 0.03, 0.045],      // 112
    [-0.03, 0.012, 0.022],      // 113
    [-0.022, -0.016, 0.014],    // 114
    [-0.036, 0.04, 0.024],      // 115
    [-0.044, 0.03, 0.03],       // 116
    [-0.02, 0.03, 0.02],        // 117
    [-0.052, -0.055, 0.04],     // 118
    [0.0, -0.018, 0.006],       // 119
];

pub(crate) const MIRROR: [usize; 120] = [
    0, 19, 18, 17, 16, 15, 14, 13, 12, 11, 10, 9, 8, 7, 6, 5, 4, 3, 2, 1, 25, 26, 27, 28, 29, 20,
    21, 22, 23, 24, 36, 37, 38, 39, 40, 41, 30, 31, 32, 33, 34, 35, 42, 43, 44, 45, 46, 48, 47, 50,
    49, 52, 51, 54, 53, 56, 55, 58, 57, 60, 59, 61, 62, 64, 63, 66, 65, 68, 67, 69, 70, 77, 78, 79,
    80, 81, 82, 71, 72, 73, 74, 75, 76, 83, 88, 89, 90, 91, 84, 85, 86, 87, 92, 93, 99, 100, 101,
    102, 103, 94, 95, 96, 97, 98, 104, 112, 113, 114, 115, 116, 117, 118, 105, 106, 107, 108, 109,
    110, 111, 119,
];
