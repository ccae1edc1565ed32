/* a and b may come in either order; both bounds are excluded. */
int CountBetween(int values[], int n, int a, int b)
{
    int lo = a < b ? a : b;
    int hi = a < b ? b : a;
    int count = 0;
    for (int i = 0; i < n; i++) {
        if (values[i] > lo && values[i] < hi) {
            count++;
        }
    }
    return count;
}
