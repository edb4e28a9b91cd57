/**
 * Very coarse continent outlines as [lon, lat] rings — enough world shape
 * to orient region selection without any tile service, so the console
 * works fully offline.
 */

export type Ring = Array<[number, number]>;

export const CONTINENT_OUTLINES: Record<string, Ring> = {
  northAmerica: [
    [-168, 66], [-158, 71], [-140, 70], [-125, 70], [-110, 73], [-95, 72],
    [-82, 70], [-70, 62], [-55, 52], [-65, 47], [-70, 43], [-75, 36],
    [-80, 31], [-81, 25], [-90, 29], [-97, 26], [-97, 20], [-105, 20],
    [-110, 23], [-115, 30], [-122, 37], [-124, 43], [-124, 48], [-130, 55],
    [-140, 60], [-152, 59], [-165, 55], [-168, 60],
  ],
  southAmerica: [
    [-80, 9], [-75, 11], [-62, 10], [-52, 5], [-44, -3], [-35, -8],
    [-39, -18], [-48, -26], [-53, -34], [-58, -39], [-65, -41], [-66, -49],
    [-69, -52], [-75, -50], [-74, -40], [-71, -30], [-70, -18], [-77, -12],
    [-81, -5], [-79, 2],
  ],
  europe: [
    [-10, 36], [-9, 43], [-2, 44], [-5, 48], [-1, 50], [5, 53], [8, 56],
    [11, 58], [18, 60], [24, 65], [29, 70], [40, 68], [50, 62], [55, 55],
    [48, 48], [42, 44], [33, 40], [27, 36], [22, 38], [15, 38], [10, 39],
    [4, 40], [-2, 36],
  ],
  africa: [
    [-17, 15], [-16, 22], [-10, 30], [-6, 35], [3, 37], [11, 37], [20, 32],
    [32, 31], [35, 28], [43, 12], [51, 11], [46, 2], [40, -4], [40, -15],
    [35, -24], [31, -30], [25, -34], [18, -34], [14, -27], [12, -18],
    [13, -8], [9, 0], [8, 4], [-5, 5], [-8, 5], [-13, 9],
  ],
  asia: [
    [55, 55], [50, 62], [40, 68], [45, 72], [60, 73], [75, 73], [95, 76],
    [110, 76], [130, 72], [150, 70], [170, 68], [179, 66], [170, 60],
    [162, 58], [156, 51], [142, 47], [135, 43], [129, 35], [122, 30],
    [121, 23], [109, 12], [104, 2], [98, 8], [92, 20], [88, 22], [80, 8],
    [77, 8], [72, 20], [66, 25], [57, 26], [56, 24], [52, 16], [44, 12],
    [43, 15], [35, 28], [32, 31], [27, 36], [33, 40], [42, 44], [48, 48],
  ],
  australia: [
    [114, -22], [113, -26], [115, -34], [124, -33], [130, -32], [136, -35],
    [140, -38], [147, -39], [150, -37], [153, -30], [153, -25], [146, -18],
    [142, -11], [136, -12], [132, -11], [126, -14], [122, -17],
  ],
  greenland: [
    [-46, 60], [-53, 66], [-55, 70], [-55, 76], [-60, 78], [-50, 82],
    [-35, 83], [-22, 82], [-20, 76], [-22, 70], [-30, 68], [-40, 62],
  ],
};
